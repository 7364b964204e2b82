from django.db import models, transaction

from .results import row_to_json
from .scenario import scenario_to_dict


class ScenarioRun(models.Model):
    STATUS_CHOICES = [
        ('ok', 'Completado'),
        ('con_errores', 'Completado con puntos fallidos'),
    ]

    name = models.CharField(max_length=100)
    preset = models.CharField(max_length=20, blank=True)
    mode = models.CharField(max_length=20, default='link')
    config = models.JSONField()
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='ok')
    fecha_creacion = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-fecha_creacion']

    def __str__(self):
        return f"{self.name} ({self.preset or 'sin preset'}) - {self.get_status_display()}"


class ResultRecord(models.Model):
    run = models.ForeignKey(
        ScenarioRun,
        on_delete=models.CASCADE,
        related_name='rows'
    )
    orden = models.PositiveIntegerField()
    seed = models.PositiveIntegerField()

    sweep_axis = models.CharField(max_length=100, blank=True)
    sweep_value = models.JSONField(null=True, blank=True)

    osnr_db = models.FloatField()
    rsop_rad_s = models.FloatField()
    pdl_db = models.FloatField()
    rx_xy_skew_ps = models.FloatField()
    scheme = models.CharField(max_length=20)

    ber = models.FloatField(null=True, blank=True)
    q_db = models.FloatField(null=True, blank=True)
    skew_est_ps = models.FloatField(null=True, blank=True)
    diagnostics = models.JSONField(default=dict)

    class Meta:
        ordering = ['run', 'orden']
        unique_together = ('run', 'orden')

    def __str__(self):
        return f"{self.run.name} #{self.orden} (semilla {self.seed})"


@transaction.atomic
def record_run(cfg, rows):
    """Guarda un escenario ejecutado con todas sus filas."""
    rows = list(rows)
    run = ScenarioRun.objects.create(
        name=cfg.name,
        preset=cfg.preset,
        mode=cfg.mode,
        config=scenario_to_dict(cfg),
        status='con_errores' if any(row.failed for row in rows) else 'ok',
    )
    ResultRecord.objects.bulk_create([
        ResultRecord(
            run=run,
            orden=orden,
            seed=row.seed,
            sweep_axis=row.sweep_axis,
            sweep_value=row_to_json(row)['sweep_value'],
            osnr_db=row.osnr_db,
            rsop_rad_s=row.rsop_rad_s,
            pdl_db=row.pdl_db,
            rx_xy_skew_ps=row.rx_xy_skew_ps,
            scheme=row.scheme,
            ber=row.ber,
            q_db=row.q_db,
            skew_est_ps=row.skew_est_ps,
            diagnostics=row.diagnostics,
        )
        for orden, row in enumerate(rows)
    ])
    return run
