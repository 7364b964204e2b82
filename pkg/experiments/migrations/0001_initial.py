# Generated by Django 5.2.8 on 2026-10-18 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ScenarioRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100)),
                ('preset', models.CharField(blank=True, max_length=20)),
                ('mode', models.CharField(default='link', max_length=20)),
                ('config', models.JSONField()),
                ('status', models.CharField(choices=[('ok', 'Completado'), ('con_errores', 'Completado con puntos fallidos')], default='ok', max_length=20)),
                ('fecha_creacion', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-fecha_creacion'],
            },
        ),
        migrations.CreateModel(
            name='ResultRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('orden', models.PositiveIntegerField()),
                ('seed', models.PositiveIntegerField()),
                ('sweep_axis', models.CharField(blank=True, max_length=100)),
                ('sweep_value', models.JSONField(blank=True, null=True)),
                ('osnr_db', models.FloatField()),
                ('rsop_rad_s', models.FloatField()),
                ('pdl_db', models.FloatField()),
                ('rx_xy_skew_ps', models.FloatField()),
                ('scheme', models.CharField(max_length=20)),
                ('ber', models.FloatField(blank=True, null=True)),
                ('q_db', models.FloatField(blank=True, null=True)),
                ('skew_est_ps', models.FloatField(blank=True, null=True)),
                ('diagnostics', models.JSONField(default=dict)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='experiments.scenariorun')),
            ],
            options={
                'ordering': ['run', 'orden'],
                'unique_together': {('run', 'orden')},
            },
        ),
    ]
