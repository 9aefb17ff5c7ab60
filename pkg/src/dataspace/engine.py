"""The actor engine: dataspaces, spawning, messages, and layering.

A dataspace holds a mux plus the actors connected to it.  Actions are
interpreted one at a time from a FIFO queue; each interpreted action
yields events that are delivered to audiences in ascending stream
order, and the actions those deliveries produce join the back of the
queue.  A dataspace is itself an actor: stream 0 is the relay to its
container, which translates between the layer's own vocabulary and the
``outbound``/``inbound`` wrappers used across the boundary.
"""
from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from . import trie
from .patch import (
    EMPTY_PATCH,
    Patch,
    RETRACT_ALL,
    apply_patch,
    drop_message,
    drop_outbound,
    lift_inbound,
    lift_message,
    render,
)
from .mux import Mux, StreamId
from .trace import Tracer
from .values import (
    INBOUND,
    OBSERVE,
    OUTBOUND,
    Value,
    WILDCARD,
    format_value,
    inbound,
    observe,
    outbound,
    unwrap,
)


@dataclass(frozen=True)
class Message:
    body: Value


@dataclass(frozen=True)
class Spawn:
    """Request to create an actor; ``boot`` returns (handler, startup actions)."""

    boot: Callable
    name: str = "actor"


#: Marker an actor includes in its returned actions to terminate itself.
QUIT = object()

Action = object  # Patch | Message | Spawn | QUIT
Event = object  # Patch | Message


class Actor:
    """Interface for things connected to a dataspace."""

    def handle(self, event: Event) -> List[Action]:
        raise NotImplementedError


META = 0  # stream id of the relay to the containing layer


class Dataspace(Actor):
    def __init__(
        self,
        boot_actions: List[Action],
        name: str = "ds",
        tracer: Optional[Tracer] = None,
        path: Tuple[str, ...] = (),
    ):
        self.name = name
        self.tracer = tracer
        self.path = path + (name,)
        self.mux = Mux()
        self.actors: dict = {}
        self.names: dict = {META: "<relay>"}
        self.crashes: dict = {}
        self.pending: deque = deque()
        sid, _, _ = self.mux.add_stream(EMPTY_PATCH)
        assert sid == META
        # The relay subscribes on behalf of the container: it must see
        # outbound assertions and interest in inbound ones.
        self.relay_interests = trie.assertion_set(
            [observe(outbound(WILDCARD)), observe(observe(inbound(WILDCARD)))]
        )
        self.mux.update_stream(META, Patch(self.relay_interests, trie.EMPTY))
        for a in boot_actions:
            self._enqueue(META, a, -1)

    # -- container side -----------------------------------------------------

    def handle(self, event: Event) -> List[Action]:
        if isinstance(event, Patch):
            self._enqueue(META, lift_inbound(event), -1)
        elif isinstance(event, Message):
            self._enqueue(META, Message(lift_message(event.body)), -1)
        else:
            raise TypeError(f"not an event: {event!r}")
        return self.run()

    # -- internals ----------------------------------------------------------

    def _trace(self, kind: str, who, payload: str, cause: int = -1) -> int:
        if self.tracer is None:
            return -1
        path = self.path + ((self.names.get(who, str(who)),) if who is not None else ())
        return self.tracer.record(kind, path, payload, cause)

    def _enqueue(self, author: StreamId, action: Action, cause: int) -> None:
        seq = self._trace("action-produced", author, _describe(action), cause)
        self.pending.append((author, action, seq))

    def run(self) -> List[Action]:
        """Interpret queued actions until inert; returns actions for the container."""
        outward: List[Action] = []
        while self.pending:
            author, action, cause = self.pending.popleft()
            seq = self._trace("action-interpreted", author, _describe(action), cause)
            if isinstance(action, Patch):
                self._interpret_patch(author, action, seq, outward)
            elif isinstance(action, Message):
                self._interpret_message(author, action, seq, outward)
            elif isinstance(action, Spawn):
                self._interpret_spawn(action, seq)
            elif action is _RETIRE:
                self._interpret_retire(author, seq, outward)
            elif action is QUIT:
                self._kill(author, seq)
            else:
                raise TypeError(f"not an action: {action!r}")
        return outward

    def _interpret_patch(self, author, action: Patch, cause, outward) -> None:
        if author in self.mux.streams:
            _, events = self.mux.update_stream(author, action)
            self._deliver_all(events, cause, outward)

    def _interpret_retire(self, author, cause, outward) -> None:
        if author in self.mux.streams:
            events = self.mux.remove_stream(author)
            self._deliver_all(events, cause, outward)
        self.names.pop(author, None)

    def _interpret_message(self, author, action: Message, cause, outward) -> None:
        for target in self.mux.route_message(action.body):
            self._deliver(target, action, cause, outward)

    def _interpret_spawn(self, action: Spawn, cause) -> None:
        sid, _, _ = self.mux.add_stream(EMPTY_PATCH)
        self.names[sid] = f"{action.name}#{sid}"
        seq = self._trace("actor-spawned", sid, action.name, cause)
        try:
            handler, startup = action.boot()
        except Exception as e:  # crash during boot kills only the new actor
            self._report_crash(sid, e)
            self._kill(sid, seq)
            return
        self.actors[sid] = handler
        front = []
        for a in startup:
            s = self._trace("action-produced", sid, _describe(a), seq)
            front.append((sid, a, s))
        self.pending.extendleft(reversed(front))

    def _deliver_all(self, events, cause, outward) -> None:
        for target, delta in events:
            self._deliver(target, delta, cause, outward)

    def _deliver(self, target: StreamId, event: Event, cause, outward) -> None:
        if target == META:
            out = _outward(event)
            if out is not None:
                self._trace("event-delivered", META, _describe(out), cause)
                outward.append(out)
            return
        handler = self.actors.get(target)
        if handler is None:
            return  # exited actors receive nothing further
        seq = self._trace("event-delivered", target, _describe(event), cause)
        try:
            actions = handler.handle(event)
        except Exception as e:
            self._report_crash(target, e)
            actions = [QUIT]
        for a in actions:
            self._enqueue(target, a, seq)

    def _kill(self, sid: StreamId, cause) -> None:
        self.actors.pop(sid, None)
        self._trace("actor-exited", sid, "", cause)
        # The retraction of a dead actor's assertions survives its death.
        seq = self._trace("action-produced", sid, "retire", cause)
        self.pending.append((sid, _RETIRE, seq))

    def _report_crash(self, sid: StreamId, e: Exception) -> None:
        who = self.names.get(sid, str(sid))
        self.crashes[sid] = e
        print(f"actor {who} crashed: {e!r}", file=sys.stderr)

    # -- inspection ---------------------------------------------------------

    def assertions(self, include_relay: bool = False) -> trie.Trie:
        """Everything currently asserted; relay bookkeeping excluded by default."""
        acc = trie.EMPTY
        for sid, t in self.mux.streams.items():
            if sid == META and not include_relay:
                continue
            acc = trie.union(acc, trie.relabel(lambda _x: (), t))
        return acc

    def layer_assertions(self) -> trie.Trie:
        """All assertions in this layer, relay mirror included, synthetic
        relay subscriptions excluded."""
        return trie.subtract(self.assertions(include_relay=True), self.relay_interests)

    def find_actors(self, cls) -> list:
        return [a for a in self.actors.values() if isinstance(a, cls)]

    def living_names(self) -> set:
        return {self.names[sid] for sid in self.actors}


_RETIRE = object()


def _outward(event: Event):
    if isinstance(event, Patch):
        translated = drop_outbound(event)
        return translated if translated.is_non_empty() else None
    body = drop_message(event.body)
    return Message(body) if body is not None else None


def _describe(action) -> str:
    if isinstance(action, Patch):
        return render(action)
    if isinstance(action, Message):
        return "<" + format_value(action.body) + ">"
    if isinstance(action, Spawn):
        return f"spawn {action.name}"
    if action is QUIT:
        return "quit"
    if action is _RETIRE:
        return "retire"
    return repr(action)


def spawn_dataspace(boot_actions: List[Action], name: str = "ds") -> Spawn:
    """A spawn request for a nested dataspace layer."""

    def boot():
        ds = Dataspace(boot_actions, name=name)
        return ds, ds.run()

    return Spawn(boot, name)


# ---------------------------------------------------------------------------
# Ground layer


class Injector:
    """Source of external events for a ground dataspace."""

    def next_event(self):  # -> Optional[Event]
        return None


def ground_run(
    boot_actions: List[Action],
    injector: Optional[Injector] = None,
    tracer: Optional[Tracer] = None,
    name: str = "ground",
) -> Dataspace:
    """Run a dataspace at ground level until it and its injector are quiet."""
    ds = Dataspace(boot_actions, name=name, tracer=tracer)
    ds.run()
    if injector is not None:
        while True:
            event = injector.next_event()
            if event is None:
                break
            ds.handle(event)
    return ds


# ---------------------------------------------------------------------------
# Full-state adapter


class FullStateActor(Actor):
    """Adapts a behavior that thinks in complete assertion sets.

    The wrapped behavior receives the full set of assertions it can see
    and replies with the full set it wants to assert; this adapter turns
    those into incremental patches, suppressing no-op updates.
    """

    def __init__(self, behavior: Callable, state, initial: trie.Trie = trie.EMPTY):
        self.behavior = behavior
        self.state = state
        self.seen = trie.EMPTY
        self.published = initial

    def handle(self, event: Event) -> List[Action]:
        if isinstance(event, Patch):
            self.seen = apply_patch(self.seen, event)
            result = self.behavior(self.state, self.seen, None)
        else:
            result = self.behavior(self.state, self.seen, event.body)
        if result is None:
            return []
        self.state, wanted, messages = result
        actions: List[Action] = []
        delta = Patch(
            trie.subtract(wanted, self.published),
            trie.subtract(self.published, wanted),
        )
        if delta.is_non_empty():
            actions.append(delta)
        self.published = wanted
        actions.extend(Message(m) for m in messages)
        return actions

    def boot_actions(self) -> List[Action]:
        if self.published is trie.EMPTY:
            return []
        return [Patch(self.published, trie.EMPTY)]


def spawn_full_state(behavior, state, initial: trie.Trie = trie.EMPTY, name="actor") -> Spawn:
    def boot():
        actor = FullStateActor(behavior, state, initial)
        return actor, actor.boot_actions()

    return Spawn(boot, name)


#: Alias: adapt a whole-assertion-set behavior to patches.
wrap_monolithic = FullStateActor
