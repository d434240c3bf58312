from django.db import models


def _finite(value):
    """Database columns hold None where the summary has NaN or an infinity."""
    if value is None:
        return None
    value = float(value)
    return value if value == value and abs(value) != float("inf") else None


class SimulationRun(models.Model):
    class Mode(models.TextChoices):
        SINGLE = "single", "Single qubit"
        EPR = "epr", "EPR pair"
        CHANNEL_INFO = "channel-info", "Channel info"
        SWEEP = "sweep", "Sweep"

    mode = models.CharField(max_length=20, choices=Mode.choices)
    config_hash = models.CharField(max_length=64, db_index=True)
    # unsigned 64-bit seeds overflow signed integer columns
    seed = models.CharField(max_length=20, blank=True)
    exact = models.BooleanField(default=False)
    output_dir = models.CharField(max_length=500)
    d_mse = models.FloatField(blank=True, null=True)
    f_t = models.FloatField(blank=True, null=True)
    gamma = models.FloatField(blank=True, null=True)
    trials = models.PositiveIntegerField(default=0)
    undecodable = models.PositiveIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'simulation_runs'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.mode} run {self.config_hash[:12]} (seed {self.seed})"

    @classmethod
    def record(cls, outcome):
        """Store a finished RunOutcome; sweep outcomes get one SweepPoint per row."""
        summary = outcome.summary
        run = cls.objects.create(
            mode=outcome.mode,
            config_hash=outcome.config_hash,
            seed="" if outcome.seed is None else str(outcome.seed),
            exact=outcome.exact,
            output_dir=str(outcome.output_dir),
            d_mse=_finite(summary.get("d_mse")),
            f_t=_finite(summary.get("f_t")),
            gamma=_finite(summary.get("gamma")),
            trials=summary.get("trials", 0),
            undecodable=summary.get("undecodable", 0),
        )
        if outcome.mode == cls.Mode.SWEEP:
            SweepPoint.objects.bulk_create(
                SweepPoint.from_row(run, row) for row in outcome.rows
            )
        return run


class SweepPoint(models.Model):
    run = models.ForeignKey(SimulationRun, on_delete=models.CASCADE, related_name='points')
    total_photons = models.BigIntegerField()
    epsilon = models.FloatField()
    param = models.FloatField()
    gamma = models.FloatField(blank=True, null=True)
    d_mse = models.FloatField(blank=True, null=True)
    f_t = models.FloatField(blank=True, null=True)
    mean_phi_tilde = models.FloatField(blank=True, null=True)
    var_phi_tilde = models.FloatField(blank=True, null=True)
    error = models.TextField(blank=True)

    class Meta:
        db_table = 'sweep_points'
        ordering = ['run', 'id']

    def __str__(self):
        return f"N={self.total_photons} eps={self.epsilon:g} param={self.param:g}"

    @classmethod
    def from_row(cls, run, row):
        summary = row.summary
        return cls(
            run=run,
            total_photons=row.total_photons,
            epsilon=row.epsilon,
            param=row.param,
            gamma=_finite(row.gamma),
            d_mse=_finite(summary.d_mse) if summary else None,
            f_t=_finite(summary.f_t) if summary else None,
            mean_phi_tilde=_finite(summary.mean_phi_tilde) if summary else None,
            var_phi_tilde=_finite(summary.var_phi_tilde) if summary else None,
            error=row.error,
        )
