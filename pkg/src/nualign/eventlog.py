"""Events and partially ordered event logs.

An event records an activity occurrence: activity name, timestamp, case
id, and the multiset of resource instances that executed it.  A log is a
set of events with a partial order that respects chronology:

- within one case, events are totally ordered by (timestamp, input
  position) -- traces must be replayable sequences, and the file position
  tie-break is the least-surprise rule for equal timestamps;
- across cases, ``e1`` precedes ``e2`` iff ``time(e1) < time(e2)``
  strictly; equal-timestamp events of different cases stay incomparable,
  which is what lets the aligner reorder concurrent events.

Timestamps only induce the order; alignment costs never read them.

CSV format (one event per row, optional header)::

    case,activity,timestamp,resources

with ``timestamp`` an ISO-8601 datetime or a number, and ``resources``
a semicolon-separated list of ``role:instance`` entries, each with an
optional ``*count`` multiplicity suffix.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from datetime import datetime

from .poset import Multiset, Poset

LOG_HEADER = ["case", "activity", "timestamp", "resources"]


class LogParseError(ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Event:
    """One recorded activity execution.

    ``index`` is the position in the source log and makes events with
    identical payloads distinct objects.  ``roles`` records the role each
    resource instance was logged under, for validation and round-trips.
    """

    index: int
    activity: str
    timestamp: float
    case: str
    resources: Multiset = field(default_factory=Multiset)
    roles: tuple = ()

    def role_of(self, instance):
        return dict(self.roles).get(instance)

    def __repr__(self):
        return f"<e{self.index} {self.activity}@{self.timestamp:g} case={self.case}>"


class EventLog:
    """Poset of events; per-case projections are totally ordered traces."""

    def __init__(self, events, order: Poset):
        self.events = tuple(events)
        self.order = order
        for e1, e2 in order.pairs():
            if e1.timestamp > e2.timestamp:
                raise ValueError(
                    f"order violates chronology: {e1!r} precedes {e2!r}"
                )
        self._by_case = {}
        for e in self.events:
            self._by_case.setdefault(e.case, []).append(e)

    def cases(self):
        return sorted(self._by_case)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def trace(self, case):
        """The case's events in trace order (chronology + input position)."""
        return sorted(
            self._by_case.get(case, []), key=lambda e: (e.timestamp, e.index)
        )

    def activities(self):
        return sorted({e.activity for e in self.events})

    def project_case(self, case) -> "EventLog":
        """Subposet of one case's events; unknown cases give an empty trace."""
        events = self.trace(case)
        keep = set(events)
        pairs = [
            (a, b) for a, b in self.order.closed_pairs() if a in keep and b in keep
        ]
        return EventLog(events, Poset(events, pairs))

    def restrict(self, events) -> "EventLog":
        """Subposet on an arbitrary event subset, order restricted."""
        keep = set(events)
        kept = [e for e in self.events if e in keep]
        pairs = [
            (a, b) for a, b in self.order.closed_pairs() if a in keep and b in keep
        ]
        return EventLog(kept, Poset(kept, pairs))


def build_order(events) -> EventLog:
    """Order events per the chronology rules and return the closed log."""
    events = list(events)
    pairs = []
    by_case = {}
    for e in events:
        by_case.setdefault(e.case, []).append(e)
    for trace in by_case.values():
        trace.sort(key=lambda e: (e.timestamp, e.index))
        pairs.extend(zip(trace, trace[1:]))
    for e1 in events:
        for e2 in events:
            if e1.case != e2.case and e1.timestamp < e2.timestamp:
                pairs.append((e1, e2))
    return EventLog(events, Poset(events, pairs).transitive_closure())


# ---------------------------------------------------------------------------
# CSV parsing / serialization
# ---------------------------------------------------------------------------

def _parse_timestamp(text, line):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text).timestamp()
    except ValueError:
        raise LogParseError(line, f"bad timestamp {text!r}") from None


def _parse_resources(text, line):
    counts = {}
    roles = {}
    text = text.strip()
    if not text:
        return Multiset(), ()
    for entry in text.split(";"):
        entry = entry.strip()
        if not entry:
            continue
        if ":" not in entry:
            raise LogParseError(line, f"resource entry {entry!r} lacks role prefix")
        role, rest = entry.split(":", 1)
        if "*" in rest:
            instance, count = rest.split("*", 1)
            try:
                n = int(count)
            except ValueError:
                raise LogParseError(line, f"bad multiplicity in {entry!r}") from None
        else:
            instance, n = rest, 1
        role, instance = role.strip(), instance.strip()
        if not role or not instance or n < 1:
            raise LogParseError(line, f"bad resource entry {entry!r}")
        if roles.get(instance, role) != role:
            raise LogParseError(line, f"instance {instance!r} listed under two roles")
        counts[instance] = counts.get(instance, 0) + n
        roles[instance] = role
    return Multiset(counts), tuple(sorted(roles.items()))


def parse_log(source) -> EventLog:
    """Parse a log from a string or text stream; see module docstring for format."""
    if isinstance(source, str):
        source = io.StringIO(source)
    events = []
    seen = {}
    for line, row in enumerate(csv.reader(source), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if line == 1 and [c.strip().lower() for c in row] == LOG_HEADER:
            continue
        if len(row) != 4:
            raise LogParseError(line, f"expected 4 columns, got {len(row)}")
        case, activity = row[0].strip(), row[1].strip()
        if not case or not activity:
            raise LogParseError(line, "empty case or activity")
        timestamp = _parse_timestamp(row[2], line)
        resources, roles = _parse_resources(row[3], line)
        key = (case, activity, timestamp)
        if key in seen:
            warnings.warn(
                f"line {line}: duplicate of line {seen[key]} "
                f"({case}, {activity}, {timestamp:g}); keeping both"
            )
        seen.setdefault(key, line)
        events.append(
            Event(len(events), activity, timestamp, case, resources, roles)
        )
    return build_order(events)


def _format_timestamp(value: float) -> str:
    return f"{value:g}" if value != int(value) else str(int(value))


def _format_resources(event: Event) -> str:
    roles = dict(event.roles)
    parts = []
    for instance in sorted(event.resources.support()):
        n = event.resources.count(instance)
        entry = f"{roles.get(instance, '?')}:{instance}"
        if n > 1:
            entry += f"*{n}"
        parts.append(entry)
    return ";".join(parts)


def serialize_log(log: EventLog) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for e in sorted(log.events, key=lambda e: (e.timestamp, e.index)):
        writer.writerow(
            [e.case, e.activity, _format_timestamp(e.timestamp), _format_resources(e)]
        )
    return out.getvalue()
