# Generated by Django 5.1.15 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='VerificationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('aqec', 'AQEC conditions'), ('ce', 'Constant-excitation immunity'), ('fidelity', 'Fidelity sweep'), ('rates', 'Rate tables')], max_length=20)),
                ('w', models.PositiveSmallIntegerField()),
                ('K', models.PositiveSmallIntegerField()),
                ('dual_rail', models.BooleanField(default=False)),
                ('parameters', models.JSONField(blank=True, default=dict)),
                ('passed', models.BooleanField(default=False)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'adshor_verification_run',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['kind', 'created_at'], name='adshor_veri_kind_e00254_idx'), models.Index(fields=['w', 'K', 'dual_rail'], name='adshor_veri_w_15fe51_idx')],
            },
        ),
        migrations.CreateModel(
            name='MetricRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('gamma', models.FloatField(blank=True, null=True)),
                ('metric', models.CharField(max_length=50)),
                ('value', models.FloatField(blank=True, null=True)),
                ('tolerance', models.FloatField(blank=True, null=True)),
                ('passed', models.BooleanField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='metrics', to='adshor.verificationrun')),
            ],
            options={
                'db_table': 'adshor_metric_record',
                'ordering': ['run', 'metric', 'gamma'],
                'indexes': [models.Index(fields=['metric'], name='adshor_metr_metric_f2f8c6_idx')],
            },
        ),
    ]
