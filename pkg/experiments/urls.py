from django.urls import path

from .views import (
    CalibrateView,
    PresetDetailView,
    PresetListView,
    RunCreateView,
    RunDetailView,
)

urlpatterns = [
    path("presets/", PresetListView.as_view(), name="preset-list"),
    path("presets/<str:name>/", PresetDetailView.as_view(), name="preset-detail"),
    path("runs/", RunCreateView.as_view(), name="run-create"),
    path("runs/<int:run_id>/", RunDetailView.as_view(), name="run-detail"),
    path("calibrate/", CalibrateView.as_view(), name="calibrate"),
]
