import logging

from django.conf import settings
from django.shortcuts import get_object_or_404

from rest_framework.views import APIView
from rest_framework.response import Response
from rest_framework import serializers, status

from drf_spectacular.utils import extend_schema, OpenApiParameter

from dsp.errors import DspError

from .models import ScenarioRun, record_run
from .presets import PRESETS, build_preset, compose_config
from .results import row_to_json
from .runner import calibration_report, run_scenario
from .scenario import scenario_to_dict
from .serializers import (
    CalibrationRequestSerializer,
    PresetDetailSerializer,
    PresetSerializer,
    ResultRowSerializer,
    RunRequestSerializer,
    ScenarioRunSerializer,
    SkewReportSerializer,
)

logger = logging.getLogger(__name__)


def _bad_request(detail):
    return Response({'detail': detail}, status=status.HTTP_400_BAD_REQUEST)


class PresetListView(APIView):
    """
    Lista los escenarios predefinidos.
    """

    @extend_schema(
        operation_id='listar_presets',
        summary='Listar presets',
        description='Devuelve el nombre, la descripción y el modo de cada preset.',
        responses={200: PresetSerializer(many=True)},
    )
    def get(self, request):
        payload = [
            {'name': name, 'description': entry['description'], 'mode': entry['config']['mode']}
            for name, entry in PRESETS.items()
        ]
        serializer = PresetSerializer(instance=payload, many=True)
        return Response(serializer.data, status=status.HTTP_200_OK)


class PresetDetailView(APIView):
    """
    Configuración completa de un preset, con los valores por defecto explícitos.
    """

    @extend_schema(
        operation_id='obtener_preset',
        summary='Configuración de un preset',
        parameters=[
            OpenApiParameter(
                name='name',
                description='Nombre del preset (por ejemplo fig5)',
                required=True,
                type=str,
                location=OpenApiParameter.PATH,
            ),
        ],
        responses={200: PresetDetailSerializer},
    )
    def get(self, request, name: str):
        if name not in PRESETS:
            return Response(
                {'detail': f"Preset '{name}' desconocido. Válidos: {', '.join(PRESETS)}."},
                status=status.HTTP_404_NOT_FOUND,
            )
        cfg = build_preset(name)
        payload = {
            'name': name,
            'description': PRESETS[name]['description'],
            'mode': cfg.mode,
            'config': scenario_to_dict(cfg),
        }
        serializer = PresetDetailSerializer(instance=payload)
        return Response(serializer.data, status=status.HTTP_200_OK)


class RunCreateView(APIView):
    """
    Valida y ejecuta un escenario de forma síncrona.
    """

    @extend_schema(
        operation_id='ejecutar_escenario',
        summary='Ejecutar un escenario',
        description=(
            "Recibe un preset, una configuración o ambos (la configuración se "
            "mezcla sobre el preset), más overrides opcionales 'ruta=valor'.\n"
            "Ejecuta todos los puntos del barrido con todas las semillas y "
            "devuelve las filas de resultados en orden de barrido. Con "
            "save=true la ejecución queda guardada."
        ),
        request=RunRequestSerializer,
        responses={201: ScenarioRunSerializer, 200: ResultRowSerializer(many=True)},
    )
    def post(self, request):
        req_serializer = RunRequestSerializer(data=request.data)
        req_serializer.is_valid(raise_exception=True)
        data = req_serializer.validated_data

        try:
            cfg = compose_config(
                preset=data.get('preset'),
                config=data.get('config'),
                overrides=data.get('overrides', ()),
            )
        except serializers.ValidationError as exc:
            return _bad_request(exc.detail)

        logger.info("[ESCENARIO] API: ejecutando %s", cfg.name)
        rows = run_scenario(cfg, jobs=settings.DSCM_LAB['DEFAULT_JOBS'])

        if not data['save']:
            serializer = ResultRowSerializer([row_to_json(row) for row in rows], many=True)
            return Response(serializer.data, status=status.HTTP_200_OK)

        run = record_run(cfg, rows)
        serializer = ScenarioRunSerializer(run)
        return Response(serializer.data, status=status.HTTP_201_CREATED)


class RunDetailView(APIView):
    """
    Devuelve una ejecución guardada con sus filas.
    """

    @extend_schema(
        operation_id='obtener_ejecucion',
        summary='Ejecución guardada',
        parameters=[
            OpenApiParameter(
                name='run_id',
                description='Identificador de la ejecución',
                required=True,
                type=int,
                location=OpenApiParameter.PATH,
            ),
        ],
        responses={200: ScenarioRunSerializer},
    )
    def get(self, request, run_id: int):
        run = get_object_or_404(ScenarioRun.objects.prefetch_related('rows'), pk=run_id)
        serializer = ScenarioRunSerializer(run)
        return Response(serializer.data, status=status.HTTP_200_OK)


class CalibrateView(APIView):
    """
    Calibración PT-MGPD en back-to-back para un front-end dado.
    """

    @extend_schema(
        operation_id='calibrar_skew',
        summary='Estimar el Rx-XY-skew (PT-MGPD)',
        description=(
            "Genera la señal de entrenamiento de un tono, aplica una rotación "
            "estática de polarización, ruido y el front-end indicado, y estima "
            "el skew XY del receptor. Devuelve el informe con el error respecto "
            "del skew configurado."
        ),
        request=CalibrationRequestSerializer,
        responses={200: SkewReportSerializer},
    )
    def post(self, request):
        req_serializer = CalibrationRequestSerializer(data=request.data)
        req_serializer.is_valid(raise_exception=True)
        data = req_serializer.validated_data
        frontend, cal = data['frontend_config'], data['calibration_config']

        try:
            report = calibration_report(frontend, cal, seed=data['seed'])
        except DspError as exc:
            return _bad_request(f"{exc.code}: {exc}")

        serializer = SkewReportSerializer(instance=report)
        return Response(serializer.data, status=status.HTTP_200_OK)
