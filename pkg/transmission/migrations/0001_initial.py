# Generated by Django 5.2.9 on 2026-10-19 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SimulationRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "mode",
                    models.CharField(
                        choices=[
                            ("single", "Single qubit"),
                            ("epr", "EPR pair"),
                            ("channel-info", "Channel info"),
                            ("sweep", "Sweep"),
                        ],
                        max_length=20,
                    ),
                ),
                ("config_hash", models.CharField(db_index=True, max_length=64)),
                ("seed", models.CharField(blank=True, max_length=20)),
                ("exact", models.BooleanField(default=False)),
                ("output_dir", models.CharField(max_length=500)),
                ("d_mse", models.FloatField(blank=True, null=True)),
                ("f_t", models.FloatField(blank=True, null=True)),
                ("gamma", models.FloatField(blank=True, null=True)),
                ("trials", models.PositiveIntegerField(default=0)),
                ("undecodable", models.PositiveIntegerField(default=0)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "db_table": "simulation_runs",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="SweepPoint",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("total_photons", models.BigIntegerField()),
                ("epsilon", models.FloatField()),
                ("param", models.FloatField()),
                ("gamma", models.FloatField(blank=True, null=True)),
                ("d_mse", models.FloatField(blank=True, null=True)),
                ("f_t", models.FloatField(blank=True, null=True)),
                ("mean_phi_tilde", models.FloatField(blank=True, null=True)),
                ("var_phi_tilde", models.FloatField(blank=True, null=True)),
                ("error", models.TextField(blank=True)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="points",
                        to="transmission.simulationrun",
                    ),
                ),
            ],
            options={
                "db_table": "sweep_points",
                "ordering": ["run", "id"],
            },
        ),
    ]
