from __future__ import annotations

import json

from apps.lab.models import ExperimentRun, ModelArtifact

from ._base import LabCommand


class Command(LabCommand):
    help = "List recent experiment runs and registered model artifacts from the ledger."

    record = False

    def add_arguments(self, parser):
        parser.add_argument("--limit", type=int, default=20)
        parser.add_argument("--json", action="store_true", help="Print machine-readable JSON.")

    def run(self, **options):
        self.positive("limit", options["limit"])
        runs = list(ExperimentRun.objects.all()[: options["limit"]])
        artifacts = ModelArtifact.objects.count()

        if options["json"]:
            payload = {
                "summary": {"runs": ExperimentRun.objects.count(), "artifacts": artifacts},
                "items": [
                    {
                        "id": r.pk,
                        "command": r.command,
                        "status": r.status,
                        "seed": r.seed,
                        "started_at": r.started_at.isoformat(),
                        "duration_seconds": r.duration_seconds,
                        "outputs": r.outputs,
                        "message": r.message,
                    }
                    for r in runs
                ],
            }
            self.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2))
            return

        self.stdout.write(self.style.MIGRATE_HEADING("windowlens runs"))
        self.stdout.write(f"- runs shown: {len(runs)}  artifacts: {artifacts}")
        for r in runs:
            style = {
                ExperimentRun.Status.OK: self.style.SUCCESS,
                ExperimentRun.Status.FAILED: self.style.ERROR,
            }.get(r.status, self.style.WARNING)
            self.stdout.write(style(f"[{r.status}] #{r.pk} {r.command} {r.started_at:%Y-%m-%d %H:%M:%S}"))
            if r.message:
                self.stdout.write(f"  {r.message}")
            for path in r.outputs:
                self.stdout.write(f"  → {path}")
