from __future__ import annotations

"""Trust rating providers for the real-world track."""

import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from models.records import RealworldEntry, TrustRating
from realworld.trust import mean_trust, read_ratings, write_ratings

from .track_pipeline import RatingProvider


@dataclass(slots=True)
class StaticRatingProvider(RatingProvider):
    """Returns predetermined mean ratings keyed by model id."""

    ratings: Dict[str, float] = field(default_factory=dict)

    def ratings_for(self, entries: Sequence[RealworldEntry], screens: Mapping[str, Path]) -> Dict[str, float]:
        return {e.model_id: float(self.ratings[e.model_id]) for e in entries if e.model_id in self.ratings}


@dataclass(slots=True)
class CsvRatingProvider(RatingProvider):
    """Reads a ``model_id,rating,rater,timestamp`` CSV and averages across raters."""

    path: str

    def ratings_for(self, entries: Sequence[RealworldEntry], screens: Mapping[str, Path]) -> Dict[str, float]:
        means = mean_trust(read_ratings(self.path))
        return {e.model_id: means[e.model_id] for e in entries if e.model_id in means}


@dataclass(slots=True)
class CLIRatingProvider(RatingProvider):
    """Interactive single-prompt flow: show each model card, ask for a 1-5 rating."""

    rater: str = "expert"
    save_path: Optional[str] = None
    ask: Callable[[str], str] = input
    show: Callable[[str], None] = print
    collected: List[TrustRating] = field(default_factory=list)

    def _prompt(self, model_id: str) -> Optional[int]:
        while True:
            answer = self.ask(f"I trust this model ({model_id}) [1-5, blank to skip]: ").strip()
            if not answer:
                return None
            if answer in {"1", "2", "3", "4", "5"}:
                return int(answer)
            self.show("[rate] please answer with a whole number from 1 to 5")

    def rate(self, model_id: str, card: Optional[Path] = None, fallback: str = "") -> Optional[TrustRating]:
        if card is not None and Path(card).exists():
            self.show(Path(card).read_text(encoding="utf-8"))
        else:
            self.show(fallback or f"[rate] {model_id}")
        rating = self._prompt(model_id)
        if rating is None:
            return None
        stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        out = TrustRating(model_id=model_id, rating=rating, rater=self.rater, timestamp=stamp)
        self.collected.append(out)
        return out

    def save(self) -> None:
        if self.save_path and self.collected:
            write_ratings(self.collected, self.save_path)
            self.show(f"[rate] saved {len(self.collected)} ratings to {self.save_path}")

    def ratings_for(self, entries: Sequence[RealworldEntry], screens: Mapping[str, Path]) -> Dict[str, float]:
        for e in entries:
            summary = f"[rate] {e.model_id}: {e.algorithm} r2={e.r2_test:.4f} simplicity={e.simplicity:.1f}"
            self.rate(e.model_id, screens.get(e.model_id), summary)
        self.save()
        return mean_trust(self.collected)


__all__ = [
    "CLIRatingProvider",
    "CsvRatingProvider",
    "StaticRatingProvider",
]
