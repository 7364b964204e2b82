import math

from django.conf import settings
from rest_framework import serializers

from dsp.channel import FrontEndImpairments, ImpairmentConfig, LinkParams, RsopPdlParams
from dsp.errors import DspError
from dsp.link import LINK_SCHEMES, CalibrationConfig
from dsp.polaris import ExtractorConfig
from dsp.rx import EqualizerConfig
from dsp.tx import DscmConfig, PilotDescriptor

from .models import ResultRecord, ScenarioRun
from .scenario import (
    MODES,
    ScenarioConfig,
    SweepAxis,
    compatible,
    field_value,
    pilot_scheme_for,
    sweepable,
)


def _lab(key):
    return settings.DSCM_LAB[key]


class DecibelField(serializers.FloatField):
    """Valor en dB que acepta "inf" (enlace o calibración sin ruido)."""

    def to_internal_value(self, data):
        if isinstance(data, str) and data.strip().lower() in ('inf', 'infinity'):
            return math.inf
        if isinstance(data, float) and math.isinf(data) and data > 0:
            return data
        return super().to_internal_value(data)

    def to_representation(self, value):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value


# =========================
# Bloques de la configuración
# =========================
# Los campos ausentes no entran en validated_data: los valores por defecto
# salen de las dataclasses de dsp.

class DscmSerializer(serializers.Serializer):
    total_baud = serializers.FloatField(min_value=0)
    num_subcarriers = serializers.IntegerField(min_value=1, required=False)
    rolloff = serializers.FloatField(min_value=0, max_value=1, required=False)
    guard_band = serializers.FloatField(min_value=0, required=False)
    sps = serializers.IntegerField(min_value=2, required=False)


class PilotSerializer(serializers.Serializer):
    f1 = serializers.FloatField(required=False)
    f2 = serializers.FloatField(required=False, allow_null=True)
    psr_db = serializers.FloatField(required=False)


class LinkParamsSerializer(serializers.Serializer):
    fiber_km = serializers.FloatField(min_value=0, required=False)
    dispersion_ps_nm_km = serializers.FloatField(required=False)
    center_wavelength_nm = serializers.FloatField(min_value=0, required=False)
    linewidth_hz = serializers.FloatField(min_value=0, required=False)
    freq_offset_hz = serializers.FloatField(required=False)
    osnr_db = DecibelField(required=False)


class RsopPdlSerializer(serializers.Serializer):
    pdl_db = serializers.FloatField(required=False)
    alpha0 = serializers.FloatField(required=False)
    beta0 = serializers.FloatField(required=False)
    eta0 = serializers.FloatField(required=False)
    omega = serializers.FloatField(min_value=0, required=False)
    dgd = serializers.FloatField(min_value=0, required=False)


class FrontEndSerializer(serializers.Serializer):
    tau_rxi = serializers.FloatField(required=False)
    tau_rxq = serializers.FloatField(required=False)
    tau_ryi = serializers.FloatField(required=False)
    tau_ryq = serializers.FloatField(required=False)
    tau_txi = serializers.FloatField(required=False)
    amp_imb_x_db = serializers.FloatField(required=False)
    amp_imb_y_db = serializers.FloatField(required=False)
    phase_imb_x_deg = serializers.FloatField(required=False)
    phase_imb_y_deg = serializers.FloatField(required=False)


class ImpairmentSerializer(serializers.Serializer):
    link = LinkParamsSerializer(required=False)
    rsop = RsopPdlSerializer(required=False)
    frontend = FrontEndSerializer(required=False)


class EqualizerSerializer(serializers.Serializer):
    taps = serializers.IntegerField(min_value=1, required=False)
    mu_cma = serializers.FloatField(min_value=0, required=False)
    mu_cmma = serializers.FloatField(min_value=0, required=False)
    cma_pretrain_symbols = serializers.IntegerField(min_value=0, required=False)
    radii = serializers.ListField(child=serializers.FloatField(min_value=0), required=False)


class ExtractorSerializer(serializers.Serializer):
    lpf_bandwidth_hz = serializers.FloatField(required=False)
    lpf_kind = serializers.ChoiceField(choices=ExtractorConfig.LPF_KINDS, required=False)
    decimation = serializers.IntegerField(min_value=1, required=False)
    num_taps = serializers.IntegerField(min_value=1, required=False)
    foe_search_span_hz = serializers.FloatField(min_value=0, required=False)


class CalibrationSerializer(serializers.Serializer):
    enabled = serializers.BooleanField(required=False)
    f1 = serializers.FloatField(required=False)
    duration = serializers.FloatField(required=False)
    osnr_db = DecibelField(required=False)
    rotation = RsopPdlSerializer(required=False)


class SweepSerializer(serializers.Serializer):
    axis = serializers.CharField()
    values = serializers.ListField(child=serializers.JSONField(), allow_empty=True)
    linked = serializers.ListField(child=serializers.CharField(), required=False)

    def validate_values(self, values):
        for value in values:
            if not isinstance(value, (int, float, str, bool)):
                raise serializers.ValidationError(
                    f"Valor de barrido no escalar: {value!r}."
                )
        return values


# =========================
# Escenario completo
# =========================

def _build_impairments(data):
    return ImpairmentConfig(
        link=LinkParams(**data.get('link', {})),
        rsop=RsopPdlParams(**data.get('rsop', {})),
        frontend=FrontEndImpairments(**data.get('frontend', {})),
    )


def _build_calibration(data):
    data = dict(data)
    if 'rotation' in data:
        data['rotation'] = RsopPdlParams(**data['rotation'])
    return CalibrationConfig(**data)


def _build_equalizer(data):
    data = dict(data)
    if 'radii' in data:
        data['radii'] = tuple(data['radii'])
    return EqualizerConfig(**data)


def _build_axis(data):
    return SweepAxis(
        axis=data['axis'],
        values=tuple(data['values']),
        linked=tuple(data.get('linked', ())),
    )


class ScenarioConfigSerializer(serializers.Serializer):
    """
    Valida el diccionario de un escenario y construye el ``ScenarioConfig``
    (queda en ``validated_data['config']``). Los errores de las dataclasses
    de dsp se devuelven como errores de validación.
    """
    name = serializers.CharField(max_length=100)
    mode = serializers.ChoiceField(choices=MODES, default='link')
    scheme = serializers.ChoiceField(choices=LINK_SCHEMES, default='SPT')
    dscm = DscmSerializer()
    pilots = PilotSerializer(required=False)
    impairments = ImpairmentSerializer(required=False)
    equalizer = EqualizerSerializer(required=False)
    extractor = ExtractorSerializer(required=False)
    calibration = CalibrationSerializer(required=False)
    sweep = SweepSerializer(required=False, allow_null=True)
    extra_axes = SweepSerializer(many=True, required=False)
    symbols_per_point = serializers.IntegerField(min_value=1, required=False)
    guard_symbols = serializers.IntegerField(min_value=0, required=False)
    seeds = serializers.ListField(
        child=serializers.IntegerField(min_value=0), allow_empty=False, required=False,
    )
    outputs = serializers.CharField(required=False, allow_blank=True)
    preset = serializers.CharField(required=False, allow_blank=True)

    def validate(self, attrs):
        try:
            config = ScenarioConfig(
                name=attrs['name'],
                mode=attrs['mode'],
                scheme=attrs['scheme'],
                dscm=DscmConfig(**attrs['dscm']),
                pilots=PilotDescriptor(
                    scheme=pilot_scheme_for(attrs['scheme']), **attrs.get('pilots', {}),
                ),
                impairments=_build_impairments(attrs.get('impairments', {})),
                equalizer=_build_equalizer(attrs.get('equalizer', {})),
                extractor=ExtractorConfig(**attrs.get('extractor', {})),
                calibration=_build_calibration(attrs.get('calibration', {})),
                sweep=_build_axis(attrs['sweep']) if attrs.get('sweep') else None,
                extra_axes=tuple(_build_axis(a) for a in attrs.get('extra_axes', ())),
                symbols_per_point=attrs.get('symbols_per_point', _lab('SYMBOLS_PER_POINT')),
                guard_symbols=attrs.get('guard_symbols', _lab('GUARD_SYMBOLS')),
                seeds=tuple(attrs.get('seeds', (1,))),
                outputs=attrs.get('outputs', ''),
                preset=attrs.get('preset', ''),
            )
            config.link_setup()
        except DspError as exc:
            raise serializers.ValidationError(str(exc)) from exc

        axes = ([config.sweep] if config.sweep else []) + list(config.extra_axes)
        for axis in axes:
            for path in axis.paths:
                if not sweepable(config, path):
                    raise serializers.ValidationError(
                        {'sweep': f"'{path}' no es un campo barrible de la configuración."}
                    )
                current = field_value(config, path)
                for value in axis.values:
                    if not compatible(current, value):
                        raise serializers.ValidationError(
                            {'sweep': f"Valor {value!r} no válido para '{path}'."}
                        )
        attrs['config'] = config
        return attrs


def parse_scenario(raw):
    """Diccionario -> ``ScenarioConfig``; lanza ``ValidationError`` si no es válido."""
    serializer = ScenarioConfigSerializer(data=raw)
    serializer.is_valid(raise_exception=True)
    return serializer.validated_data['config']


# =========================
# Respuestas de la API
# =========================

class PresetSerializer(serializers.Serializer):
    name = serializers.CharField()
    description = serializers.CharField()
    mode = serializers.CharField()


class PresetDetailSerializer(PresetSerializer):
    config = serializers.JSONField()


class ResultRowSerializer(serializers.Serializer):
    scenario = serializers.CharField()
    seed = serializers.IntegerField()
    sweep_axis = serializers.CharField(allow_blank=True)
    sweep_value = serializers.JSONField(allow_null=True)
    osnr_db = DecibelField()
    rsop_rad_s = serializers.FloatField()
    pdl_db = serializers.FloatField()
    rx_xy_skew_ps = serializers.FloatField()
    scheme = serializers.CharField()
    ber = serializers.FloatField(allow_null=True)
    q_db = DecibelField(allow_null=True)
    skew_est_ps = serializers.FloatField(allow_null=True)
    diagnostics = serializers.JSONField()


class RunRequestSerializer(serializers.Serializer):
    preset = serializers.CharField(required=False)
    config = serializers.JSONField(required=False)
    overrides = serializers.ListField(child=serializers.CharField(), required=False)
    save = serializers.BooleanField(default=True)

    def validate(self, attrs):
        if 'preset' not in attrs and 'config' not in attrs:
            raise serializers.ValidationError("Indique 'preset', 'config' o ambos.")
        if 'config' in attrs and not isinstance(attrs['config'], dict):
            raise serializers.ValidationError({'config': "Debe ser un objeto."})
        return attrs


class ResultRecordSerializer(serializers.ModelSerializer):
    osnr_db = DecibelField()
    q_db = DecibelField(allow_null=True)

    class Meta:
        model = ResultRecord
        fields = [
            'orden', 'seed', 'sweep_axis', 'sweep_value', 'osnr_db', 'rsop_rad_s',
            'pdl_db', 'rx_xy_skew_ps', 'scheme', 'ber', 'q_db', 'skew_est_ps',
            'diagnostics',
        ]


class ScenarioRunSerializer(serializers.ModelSerializer):
    rows = ResultRecordSerializer(many=True, read_only=True)

    class Meta:
        model = ScenarioRun
        fields = ['id', 'name', 'preset', 'mode', 'status', 'config', 'fecha_creacion', 'rows']


class CalibrationRequestSerializer(serializers.Serializer):
    frontend = FrontEndSerializer(required=False)
    calibration = CalibrationSerializer(required=False)
    seed = serializers.IntegerField(min_value=0, default=1)

    def validate(self, attrs):
        try:
            attrs['frontend_config'] = FrontEndImpairments(**attrs.get('frontend', {}))
            attrs['calibration_config'] = _build_calibration(attrs.get('calibration', {}))
        except DspError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs


class SkewReportSerializer(serializers.Serializer):
    tau_xy_ps = serializers.FloatField()
    angle_x = serializers.FloatField()
    angle_y = serializers.FloatField()
    tone_snr_x_db = serializers.FloatField()
    tone_snr_y_db = serializers.FloatField()
    unambiguous_range_ps = serializers.FloatField()
    true_skew_ps = serializers.FloatField()
    error_ps = serializers.FloatField()
