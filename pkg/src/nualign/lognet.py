"""Build the colored net representation of an event log.

One transition per event, labeled with the event's activity.  Three kinds
of places wire the observed behavior together:

- ``res_<event>_<instance>``: per event and observed resource instance, an
  input place holding ``(eps, instance)`` tokens with the observed
  multiplicity, consumed entirely by the event's transition -- the
  recorded resource demand;
- ``ord_<e1>_<e2>``: per pair in the transitive *reduction* of the log
  order, a connecting place whose token carries the case id when both
  events belong to one case and is plain otherwise.  The reduction gives
  the same firing constraints as the full order with linearly many places;
- ``src_<case>`` / ``snk_<case>``: a source place per globally minimal
  event (marked initially) and a sink place per globally maximal event
  (required finally), carrying the event's case id.

Inscriptions use concrete identifiers, so log transitions have no
variables and fire with the empty mode.  Complete executions of the log
net are exactly the linearizations of the log.
"""

from __future__ import annotations

from .eventlog import EventLog
from .rcnu import EPS, ColoredMarking, ColoredNet
from .poset import Multiset


class LogNet(ColoredNet):
    """Colored net of an event log, with the transition -> event mapping."""

    def __init__(self, places, transitions, labels, flow, initial, final,
                 event_of):
        super().__init__(places, transitions, labels, flow, initial, final)
        self.event_of = dict(event_of)
        self.transition_of = {e: t for t, e in self.event_of.items()}


def transition_id(event) -> str:
    return f"t_e{event.index}"


def build_log_net(log: EventLog) -> LogNet:
    places = []
    transitions = []
    labels = {}
    flow = {}
    event_of = {}
    initial_tokens = {}
    final_tokens = {}

    for e in log.events:
        t = transition_id(e)
        transitions.append(t)
        labels[t] = e.activity
        event_of[t] = e
        for inst in sorted(e.resources.support()):
            n = e.resources.count(inst)
            p = f"res_e{e.index}_{inst}"
            places.append(p)
            flow[(p, t)] = Multiset({(EPS, inst): n})
            initial_tokens[p] = Multiset({(EPS, inst): n})

    reduction = log.order.transitive_reduction()
    for e1, e2 in sorted(reduction.pairs(), key=lambda pr: (pr[0].index, pr[1].index)):
        p = f"ord_e{e1.index}_e{e2.index}"
        places.append(p)
        token = (e1.case, EPS) if e1.case == e2.case else (EPS, EPS)
        flow[(transition_id(e1), p)] = Multiset([token])
        flow[(p, transition_id(e2))] = Multiset([token])

    for e in sorted(log.order.minimum(), key=lambda e: e.index):
        p = f"src_{e.case}"
        places.append(p)
        flow[(p, transition_id(e))] = Multiset([(e.case, EPS)])
        initial_tokens[p] = Multiset({(e.case, EPS): 1})
    for e in sorted(log.order.maximum(), key=lambda e: e.index):
        p = f"snk_{e.case}"
        places.append(p)
        flow[(transition_id(e), p)] = Multiset([(e.case, EPS)])
        final_tokens[p] = Multiset({(e.case, EPS): 1})

    return LogNet(
        places, transitions, labels, flow,
        ColoredMarking(initial_tokens), ColoredMarking(final_tokens),
        event_of,
    )
