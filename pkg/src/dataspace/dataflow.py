"""Dependency tracking between observable cells and the subjects reading them.

While a subject (any hashable token standing for a computation) is
active, reads of observable objects are recorded as edges.  Damaging an
object schedules every depending subject for re-evaluation; repair
rounds run until no damage remains, re-recording the dependencies each
subject exhibits on its fresh run.
"""
from __future__ import annotations

import sys
from typing import Callable, Dict, Optional, Set


class Graph:
    __slots__ = ("edges_forward", "edges_reverse", "damaged", "active_subject")

    def __init__(self):
        self.edges_forward: Dict[object, Set[object]] = {}
        self.edges_reverse: Dict[object, Set[object]] = {}
        self.damaged: Set[object] = set()
        self.active_subject: Optional[object] = None

    def with_subject(self, subject, thunk: Callable):
        """Evaluate ``thunk`` with reads attributed to ``subject``."""
        outer = self.active_subject
        self.active_subject = subject
        try:
            return thunk()
        finally:
            self.active_subject = outer

    def record_observation(self, obj) -> None:
        subject = self.active_subject
        if subject is None:
            return
        self.edges_forward.setdefault(obj, set()).add(subject)
        self.edges_reverse.setdefault(subject, set()).add(obj)

    def record_damage(self, obj) -> None:
        self.damaged.add(obj)

    def forget_subject(self, subject) -> None:
        for obj in self.edges_reverse.pop(subject, ()):
            subjects = self.edges_forward.get(obj)
            if subjects is not None:
                subjects.discard(subject)
                if not subjects:
                    del self.edges_forward[obj]

    def repair_damage(self, evaluate: Callable[[object], None]) -> None:
        """Re-run depending subjects until no new damage appears.

        ``evaluate`` re-runs one subject; its reads are re-recorded under
        that subject.  A subject damaged again after its own repair in
        the same call indicates a dependency cycle and is only warned
        about, not re-run forever.
        """
        repaired: Set[object] = set()
        while self.damaged:
            workset = self.damaged
            self.damaged = set()
            subjects: Set[object] = set()
            for obj in workset:
                subjects.update(self.edges_forward.get(obj, ()))
            again = subjects & repaired
            if again:
                print(
                    f"Cyclic dependencies involving {sorted(map(str, again))}",
                    file=sys.stderr,
                )
                subjects -= again
            repaired |= subjects
            for subject in sorted(subjects, key=_subject_order):
                self.forget_subject(subject)
                self.with_subject(subject, lambda s=subject: evaluate(s))


def _subject_order(subject):
    # Deterministic repair order; subjects expose an id when they have one.
    return getattr(subject, "order_key", None) or (1, str(subject))
