"""
Persisted verification runs and their flattened metrics
"""

from django.db import models


class VerificationRun(models.Model):
    """
    One certification or sweep over a single code.
    ``summary`` holds the JSON report the run produced.
    """
    KIND_AQEC = 'aqec'
    KIND_CE = 'ce'
    KIND_FIDELITY = 'fidelity'
    KIND_RATES = 'rates'
    KIND_CHOICES = [
        (KIND_AQEC, 'AQEC conditions'),
        (KIND_CE, 'Constant-excitation immunity'),
        (KIND_FIDELITY, 'Fidelity sweep'),
        (KIND_RATES, 'Rate tables'),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    w = models.PositiveSmallIntegerField()
    K = models.PositiveSmallIntegerField()
    dual_rail = models.BooleanField(default=False)
    parameters = models.JSONField(default=dict, blank=True)
    passed = models.BooleanField(default=False)
    summary = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'adshor_verification_run'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['kind', 'created_at']),
            models.Index(fields=['w', 'K', 'dual_rail']),
        ]

    @property
    def label(self):
        n = (self.w + 1) * (self.w + self.K) * (2 if self.dual_rail else 1)
        return f"[[{n},{self.K}]]"

    def __str__(self):
        return f"{self.kind} {self.label} ({'pass' if self.passed else 'fail'})"


class MetricRecord(models.Model):
    """One row of the spec,gamma,metric,value,tolerance,pass schema."""
    run = models.ForeignKey(VerificationRun, on_delete=models.CASCADE, related_name='metrics')
    gamma = models.FloatField(null=True, blank=True)
    metric = models.CharField(max_length=50)
    value = models.FloatField(null=True, blank=True)
    tolerance = models.FloatField(null=True, blank=True)
    passed = models.BooleanField(null=True, blank=True)

    class Meta:
        db_table = 'adshor_metric_record'
        ordering = ['run', 'metric', 'gamma']
        indexes = [
            models.Index(fields=['metric']),
        ]

    def to_row(self):
        return {
            'spec': self.run.label,
            'gamma': self.gamma,
            'metric': self.metric,
            'value': self.value,
            'tolerance': self.tolerance,
            'pass': self.passed,
        }

    def __str__(self):
        return f"{self.run.label} {self.metric}@{self.gamma} = {self.value}"
