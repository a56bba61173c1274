"""Writes a finished track: report.json, scores.csv, timings.csv, CD tables and report.md."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

from export.csv_writer import write_cd_csv, write_realworld_csv, write_scores_csv, write_timings_csv
from export.json_writer import write_json
from export.markdown_writer import write_track_md
from pipelines.track_pipeline import ReportWriter, TrackResult

logger = logging.getLogger(__name__)


def report_payload(result: TrackResult) -> Dict[str, Any]:
    """Everything in report.json; wall times are stripped by the JSON writer."""
    return {
        "track": result.config.track.value,
        "config": result.config,
        "assumptions": result.assumptions,
        "reports": result.reports,
        "scores": result.scores,
        "models": result.models,
        "qualification": result.qualification,
        "recovery": result.recovery,
        "showcase": result.showcase,
        "realworld": result.realworld,
    }


@dataclass(slots=True)
class FileReportWriter(ReportWriter):
    report_name: str = "report"

    def write(self, result: TrackResult, out_dir: Path) -> Dict[str, str]:
        out_dir = Path(out_dir)
        outputs: Dict[str, str] = {}
        outputs["json"] = write_json(report_payload(result), out_dir / f"{self.report_name}.json")
        outputs["scores"] = write_scores_csv(result.scores, out_dir / "scores.csv")
        outputs["timings"] = write_timings_csv(result.models, out_dir / "timings.csv")
        for scope, report in result.reports.items():
            outputs[f"cd:{scope}"] = write_cd_csv(report, out_dir / f"cd_{scope}.csv")
        for target, scores in result.realworld.items():
            outputs[f"realworld:{target}"] = write_realworld_csv(scores, out_dir / f"realworld_{target}.csv", target)
        outputs["markdown"] = write_track_md(result, str(out_dir / f"{self.report_name}.md"))
        logger.info("wrote %d files to %s", len(outputs), out_dir)
        return outputs


__all__ = ["FileReportWriter", "report_payload"]
