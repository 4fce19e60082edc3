# Generated by Django 5.2 on 2026-10-16 12:00

import uuid

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('command', models.CharField(choices=[('ber', 'BER/FER'), ('exit', 'EXIT-диаграмма'), ('evolve', 'Эволюция SNR'), ('cov', 'Ковариация'), ('interleaver', 'Перемежитель')], max_length=20)),
                ('config', models.JSONField()),
                ('seed', models.BigIntegerField()),
                ('version', models.CharField(max_length=20)),
                ('result_path', models.CharField(max_length=500)),
                ('manifest_path', models.CharField(max_length=500)),
                ('rows', models.PositiveIntegerField(default=0)),
                ('timings', models.JSONField(blank=True, default=dict)),
                ('started_at', models.DateTimeField()),
                ('finished_at', models.DateTimeField()),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-finished_at'],
                'indexes': [models.Index(fields=['command', 'finished_at'], name='experiments_command_idx')],
            },
        ),
    ]
