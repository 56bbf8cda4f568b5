from django.db import models
from django.utils import timezone

from .trainer import Algorithm


class ExperimentRun(models.Model):
    """관리 명령 1회 실행 = 1 row. 옵션/결과 파일을 남겨 재현 근거로 쓴다."""

    class Status(models.TextChoices):
        RUNNING = "RUNNING", "Running"
        OK = "OK", "OK"
        FAILED = "FAILED", "Failed"

    command = models.CharField(max_length=50, db_index=True)
    options = models.JSONField(blank=True, default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(max_length=10, choices=Status.choices, default=Status.RUNNING)
    message = models.TextField(blank=True, default="")
    outputs = models.JSONField(blank=True, default=list)
    started_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-started_at", "-id"]

    def __str__(self):
        return f"{self.command} #{self.pk} ({self.status})"

    @property
    def duration_seconds(self):
        if not self.finished_at:
            return None
        return (self.finished_at - self.started_at).total_seconds()


class ModelArtifact(models.Model):
    """
    학습된 모델 파일 1개. config_key = sha256(corpus sha256 + 학습 설정 JSON).
    같은 key + 파일 hash 일치 → 재학습 없이 재사용.
    """

    config_key = models.CharField(max_length=64, unique=True)
    corpus_sha256 = models.CharField(max_length=64, db_index=True)
    algorithm = models.CharField(max_length=10, choices=Algorithm.choices)
    window = models.PositiveIntegerField()
    dim = models.PositiveIntegerField()
    seed = models.BigIntegerField()
    config = models.JSONField(blank=True, default=dict)
    path = models.CharField(max_length=500)
    file_sha256 = models.CharField(max_length=64)
    vocab_size = models.PositiveIntegerField(default=0)
    total_tokens = models.PositiveBigIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["algorithm", "window", "dim"]
        indexes = [
            models.Index(fields=["algorithm", "window"], name="lab_artifact_algo_window_idx"),
        ]

    def __str__(self):
        return f"{self.algorithm} w={self.window} d={self.dim} ({self.file_sha256[:8]})"
