"""Session-level simulator for a small 802.11 deployment.

Emulates stations associating to access points, exchanging UDP-like
traffic and churning sessions, and injects four anomaly kinds (AP halt,
background noise, AP overload, flash crowd). The output is a session log:
one row per association interval with per-direction byte/packet totals.

The simulator is deterministic in (spec, seed). Randomness is split into
named per-concern, per-station substreams so that an anomaly only consumes
draws inside its window: before the window an anomalous run is draw-for-draw
identical to the normal run with the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .errors import ValidationError

ROAMING = "linear-roaming"
IN_ROOM = "in-room"
MOBILITY_CLASSES = (ROAMING, IN_ROOM)

ANOMALY_KINDS = ("none", "ap_halt", "noise", "overload", "flash_crowd")
FLOW_DIRECTIONS = ("download", "upload", "bidirectional")

NOISE_FLOOR_DBM = -110.0
NOISE_MAX_DBM = -90.0


@dataclass(frozen=True)
class FlowSpec:
    """One traffic flow: who talks, in which direction, how much."""

    direction: str
    targets: str  # "all", "ap:<k>" (stations homed on AP k) or "sta:<i,j,...>"
    mean_bytes: float
    sd_bytes: float
    rate_per_s: float

    def validate(self) -> None:
        if self.direction not in FLOW_DIRECTIONS:
            raise ValidationError(f"flow.direction: unknown direction {self.direction!r}")
        if self.mean_bytes <= 0:
            raise ValidationError("flow.mean_bytes: must be > 0")
        if self.sd_bytes < 0:
            raise ValidationError("flow.sd_bytes: must be >= 0")
        if self.rate_per_s <= 0:
            raise ValidationError("flow.rate_per_s: must be > 0")
        _parse_targets(self.targets)


@dataclass(frozen=True)
class TrafficPlan:
    flows: tuple[FlowSpec, ...]

    def validate(self) -> None:
        for flow in self.flows:
            flow.validate()


def default_traffic() -> TrafficPlan:
    """Video downloads to the in-room AP, bulk uploads from the roaming AP,
    and light two-way echo traffic for everyone."""
    return TrafficPlan(flows=(
        FlowSpec("download", "ap:1", 600.0, 150.0, 8.0),
        FlowSpec("upload", "ap:0", 500.0, 100.0, 6.0),
        FlowSpec("bidirectional", "all", 200.0, 50.0, 5.0),
    ))


@dataclass(frozen=True)
class TopologySpec:
    ap_count: int = 2
    sta_count: int = 16
    # station id -> home AP; every station appears exactly once
    initial_assignment: dict[int, int] = field(default_factory=dict)
    # station id -> mobility class
    mobility: dict[int, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.ap_count < 1:
            raise ValidationError("topology.ap_count: must be >= 1")
        if self.sta_count < 0:
            raise ValidationError("topology.sta_count: must be >= 0")
        if sorted(self.initial_assignment) != list(range(self.sta_count)):
            raise ValidationError("topology.initial_assignment: every station id must appear exactly once")
        for sid, ap in self.initial_assignment.items():
            if not 0 <= ap < self.ap_count:
                raise ValidationError(f"topology.initial_assignment: station {sid} assigned to unknown AP {ap}")
        for sid in range(self.sta_count):
            if self.mobility.get(sid) not in MOBILITY_CLASSES:
                raise ValidationError(f"topology.mobility: station {sid} needs a class in {MOBILITY_CLASSES}")


def default_topology(ap_count: int = 2, sta_count: int = 16) -> TopologySpec:
    """First half of the stations roam from AP 0, second half sit in the
    room served by AP 1 (or AP 0 when there is a single AP)."""
    room_ap = 1 if ap_count > 1 else 0
    half = sta_count // 2
    assignment = {}
    mobility = {}
    for sid in range(sta_count):
        if sid < half:
            assignment[sid] = 0
            mobility[sid] = ROAMING
        else:
            assignment[sid] = room_ap
            mobility[sid] = IN_ROOM
    return TopologySpec(ap_count=ap_count, sta_count=sta_count,
                        initial_assignment=assignment, mobility=mobility)


@dataclass(frozen=True)
class AnomalySpec:
    kind: str = "none"
    target_ap: int = 1
    window: tuple[float, float] = (0.0, 0.0)
    halt_period_s: float = 15.0
    noise_dbm: float = NOISE_FLOOR_DBM
    burst_duration_s: float = 30.0
    sleep_duration_s: float = 30.0
    direction: str = "arrival"  # flash crowd only
    node_count: int = 7

    def validate(self, run_duration_s: float, ap_count: int) -> None:
        if self.kind not in ANOMALY_KINDS:
            raise ValidationError(f"anomaly.kind: unknown kind {self.kind!r}")
        if self.kind == "none":
            return
        if not 0 <= self.target_ap < ap_count:
            raise ValidationError(f"anomaly.target_ap: unknown AP {self.target_ap}")
        ws, we = self.window
        if not (0 <= ws <= we <= run_duration_s):
            raise ValidationError("anomaly.window: must lie within [0, run.duration_s]")
        if ws != int(ws) or we != int(we):
            raise ValidationError("anomaly.window: endpoints must be whole seconds")
        if self.kind == "ap_halt":
            if self.halt_period_s <= 0:
                raise ValidationError("anomaly.halt_period_s: must be > 0")
        elif self.kind == "noise":
            if not NOISE_FLOOR_DBM <= self.noise_dbm <= NOISE_MAX_DBM:
                raise ValidationError(
                    f"anomaly.noise_dbm: must be in [{NOISE_FLOOR_DBM:g}, {NOISE_MAX_DBM:g}]")
        elif self.kind == "overload":
            if self.burst_duration_s <= 0:
                raise ValidationError("anomaly.burst_duration_s: must be > 0")
            if self.sleep_duration_s <= 0:
                raise ValidationError("anomaly.sleep_duration_s: must be > 0")
        elif self.kind == "flash_crowd":
            if self.direction not in ("arrival", "departure"):
                raise ValidationError(f"anomaly.direction: must be arrival or departure")
            if self.node_count < 1:
                raise ValidationError("anomaly.node_count: must be >= 1")


@dataclass(frozen=True)
class SimParams:
    """Behavioral constants of the simulator. All config-overridable."""

    # roaming stations
    handover_leave_prob: float = 0.01    # per second, away from current home-side AP
    handover_return_prob: float = 0.015  # per second, back toward home AP
    blind_spot_prob: float = 0.005       # per second, drop into a blind spot
    reconnect_mean_s: float = 5.0
    # in-room stations
    reassoc_prob: float = 0.002          # per second, drop+rejoin the same AP
    inroom_disconnect_prob: float = 0.0012
    # accounting: sessions are re-registered periodically
    account_interval_min_s: float = 25.0
    account_interval_max_s: float = 40.0
    # user activity cycling (modulates traffic rates, not associations)
    activity_on_to_off: float = 0.008
    activity_off_to_on: float = 0.016
    idle_rate_factor: float = 0.1
    # coordinated movements of roaming stations (lecture-change style)
    migration_rate: float = 0.006        # per second, probability of an event
    migration_move_prob: float = 0.7     # per roaming station, given an event
    migration_max_movers: int = 7
    # shared-medium capacity per AP, bytes per second
    downlink_capacity_Bps: float = 46_000.0
    uplink_saturated_keep: float = 0.30  # uplink delivery ratio while downlink saturated
    # anomaly behavior
    overload_churn_factor: float = 5.0
    burst_mean_bytes: float = 1200.0
    burst_sd_bytes: float = 200.0
    burst_rate_per_s: float = 50.0
    noise_churn_slope: float = 3.0       # churn multiplier = 1 + slope * (1 - p)


@dataclass(frozen=True)
class ScenarioSpec:
    topology: TopologySpec = field(default_factory=default_topology)
    traffic: TrafficPlan = field(default_factory=default_traffic)
    anomaly: AnomalySpec = field(default_factory=AnomalySpec)
    run_duration_s: float = 600.0
    slot_length_s: float = 15.0
    seed: int = 1
    params: SimParams = field(default_factory=SimParams)

    def validate(self) -> None:
        self.topology.validate()
        self.traffic.validate()
        if self.slot_length_s <= 0:
            raise ValidationError("run.slot_s: must be > 0")
        if self.run_duration_s <= 0:
            raise ValidationError("run.duration_s: must be > 0")
        if self.run_duration_s != int(self.run_duration_s) or self.slot_length_s != int(self.slot_length_s):
            raise ValidationError("run.duration_s and run.slot_s must be whole seconds")
        n_slots = self.run_duration_s / self.slot_length_s
        if abs(n_slots - round(n_slots)) > 1e-9:
            raise ValidationError("run.duration_s: must be an integer multiple of run.slot_s")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("run.seed: must be a 64-bit unsigned integer")
        self.anomaly.validate(self.run_duration_s, self.topology.ap_count)

    @property
    def slot_count(self) -> int:
        return int(round(self.run_duration_s / self.slot_length_s))


@dataclass(frozen=True)
class SessionEvent:
    """One association interval of a station on an AP."""

    ap_id: int
    station_id: int
    start_s: float
    end_s: float
    input_octets: int    # client -> network
    output_octets: int   # network -> client
    input_packets: int
    output_packets: int


def noise_delivery_prob(noise_dbm: float) -> float:
    """Downlink delivery probability as a function of noise power.

    1.0 at the -110 dBm floor, falling linearly to 0.3 at -90 dBm.
    """
    if noise_dbm <= NOISE_FLOOR_DBM:
        return 1.0
    frac = (noise_dbm - NOISE_FLOOR_DBM) / (NOISE_MAX_DBM - NOISE_FLOOR_DBM)
    return 1.0 - 0.7 * min(frac, 1.0)


def _parse_targets(selector: str) -> tuple[str, object]:
    if selector == "all":
        return ("all", None)
    if selector.startswith("ap:"):
        try:
            return ("ap", int(selector[3:]))
        except ValueError:
            raise ValidationError(f"flow.targets: bad AP selector {selector!r}") from None
    if selector.startswith("sta:"):
        try:
            ids = tuple(int(x) for x in selector[4:].split(",") if x != "")
        except ValueError:
            raise ValidationError(f"flow.targets: bad station selector {selector!r}") from None
        return ("sta", ids)
    raise ValidationError(f"flow.targets: unknown selector {selector!r}")


class _Station:
    __slots__ = ("sid", "home", "mobility", "extra", "ap", "sess_start",
                 "acc", "reconnect_at", "next_segment_at", "active",
                 "suspended_until", "depart_at", "mob", "traf", "anom", "act")

    def __init__(self, sid, home, mobility, seed, extra=False):
        self.sid = sid
        self.home = home
        self.mobility = mobility
        self.extra = extra              # joined via flash crowd, not in the plan
        self.ap = None
        self.sess_start = 0.0
        self.acc = [0, 0, 0, 0]         # in_octets, out_octets, in_pkts, out_pkts
        self.reconnect_at = math.inf
        self.next_segment_at = math.inf
        self.active = True
        self.suspended_until = -1.0     # flash departure parking
        self.depart_at = math.inf       # flash arrival lifetime
        self.mob = rng.substream(seed, rng.MOBILITY, sid)
        self.traf = rng.substream(seed, rng.TRAFFIC, sid)
        self.anom = rng.substream(seed, rng.ANOMALY, sid)
        self.act = rng.substream(seed, rng.ACTIVITY, sid)


class _Sim:
    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.p = spec.params
        self.duration = int(spec.run_duration_s)
        self.events: list[SessionEvent] = []
        self.stations: list[_Station] = []
        self.flow_targets = [_parse_targets(f.targets) for f in spec.traffic.flows]
        self.migration = rng.substream(spec.seed, rng.MIGRATION)
        self.capacity = [rng.substream(spec.seed, rng.CAPACITY, ap)
                         for ap in range(spec.topology.ap_count)]
        a = spec.anomaly
        self.kind = a.kind
        self.ws = int(a.window[0]) if a.kind != "none" else 0
        self.we = int(a.window[1]) if a.kind != "none" else 0

    # -- session bookkeeping ------------------------------------------------

    def _associate(self, sta: _Station, ap: int, t: float) -> None:
        sta.ap = ap
        sta.sess_start = round(t, 3)
        sta.acc = [0, 0, 0, 0]
        span = sta.mob.uniform(self.p.account_interval_min_s, self.p.account_interval_max_s)
        sta.next_segment_at = t + span

    def _close(self, sta: _Station, t: float) -> None:
        end = round(min(t, float(self.duration)), 3)
        if sta.ap is not None and end > sta.sess_start:
            self.events.append(SessionEvent(
                ap_id=sta.ap, station_id=sta.sid,
                start_s=sta.sess_start, end_s=end,
                input_octets=int(sta.acc[0]), output_octets=int(sta.acc[1]),
                input_packets=int(sta.acc[2]), output_packets=int(sta.acc[3])))
        sta.ap = None
        sta.acc = [0, 0, 0, 0]
        sta.next_segment_at = math.inf

    # -- per-second phases ---------------------------------------------------

    def _halted(self, ap: int, t: int) -> bool:
        return self.kind == "ap_halt" and self.ws <= t < self.we and ap == self.spec.anomaly.target_ap

    def _burst_active(self, t: int) -> bool:
        if self.kind != "overload" or not self.ws <= t < self.we:
            return False
        period = self.spec.anomaly.burst_duration_s + self.spec.anomaly.sleep_duration_s
        return (t - self.ws) % period < self.spec.anomaly.burst_duration_s

    def _noise_p(self, t: int) -> float:
        if self.kind == "noise" and self.ws <= t < self.we:
            return noise_delivery_prob(self.spec.anomaly.noise_dbm)
        return 1.0

    def _churn_mult(self, sta: _Station, t: int, burst: bool, noise_p: float) -> float:
        mult = 1.0
        if noise_p < 1.0:
            mult *= 1.0 + self.p.noise_churn_slope * (1.0 - noise_p)
        if burst and sta.ap == self.spec.anomaly.target_ap:
            mult *= self.p.overload_churn_factor
        return mult

    def _flash_events(self, t: int) -> None:
        a = self.spec.anomaly
        if self.kind != "flash_crowd" or t != self.ws or self.ws == self.we:
            return
        if a.direction == "arrival":
            base = self.spec.topology.sta_count
            for k in range(a.node_count):
                sta = _Station(base + k, a.target_ap, IN_ROOM, self.spec.seed, extra=True)
                sta.depart_at = float(self.we)
                self.stations.append(sta)
                jitter = sta.anom.uniform(0.0, 0.999)
                self._associate(sta, a.target_ap, t + jitter)
        else:
            present = [s for s in self.stations if s.ap == a.target_ap]
            if len(present) < a.node_count:
                raise ValidationError(
                    f"anomaly.node_count: departure needs >= {a.node_count} stations on AP "
                    f"{a.target_ap} at window start, found {len(present)}")
            for sta in present[:a.node_count]:
                jitter = sta.anom.uniform(0.0, 0.999)
                self._close(sta, t + jitter)
                sta.suspended_until = float(self.we)
                sta.reconnect_at = float(self.we)

    def _mobility_step(self, sta: _Station, t: int, burst: bool, noise_p: float) -> None:
        p = self.p
        if t < sta.suspended_until:
            return
        if sta.extra and t >= sta.depart_at:
            if sta.ap is not None:
                self._close(sta, sta.depart_at)
            sta.suspended_until = math.inf
            return

        if sta.ap is None:
            if t >= sta.reconnect_at:
                if sta.mobility == ROAMING and self.spec.topology.ap_count > 1:
                    target = sta.home if sta.mob.uniform() < 0.6 else 1 - sta.home
                else:
                    target = sta.home
                if self._halted(target, t):
                    other = 1 - target if self.spec.topology.ap_count > 1 else target
                    if sta.mobility == ROAMING and not self._halted(other, t):
                        target = other
                    else:
                        return  # wait out the halt, retry next second
                self._associate(sta, target, t + sta.mob.uniform(0.0, 0.999))
            return

        # halt entry: the AP cuts power at the window start
        if self._halted(sta.ap, t):
            self._close(sta, float(max(self.ws, t)))
            if sta.mobility == ROAMING and self.spec.topology.ap_count > 1:
                other = 1 - self.spec.anomaly.target_ap
                if not self._halted(other, t):
                    self._associate(sta, other, max(self.ws, t) + sta.mob.uniform(0.0, 0.999))
                    return
            sta.reconnect_at = float(self.we)
            return

        # periodic accounting re-registration
        if t >= sta.next_segment_at:
            at = sta.next_segment_at
            ap = sta.ap
            self._close(sta, at)
            self._associate(sta, ap, at)

        mult = self._churn_mult(sta, t, burst, noise_p)
        if sta.mobility == ROAMING:
            u_move = sta.mob.uniform()
            u_drop = sta.mob.uniform()
            if self.spec.topology.ap_count > 1:
                leave = p.handover_leave_prob if sta.ap == sta.home else p.handover_return_prob
                if self.migrate_now and u_move < p.migration_move_prob and self.migrate_slots > 0 \
                        and sta.ap != self.migrate_target:
                    if not self._halted(self.migrate_target, t):
                        self.migrate_slots -= 1
                        at = t + sta.mob.uniform(0.0, 0.999)
                        self._close(sta, at)
                        self._associate(sta, self.migrate_target, at)
                        return
                elif u_move < leave * mult:
                    other = 1 - sta.ap
                    if not self._halted(other, t):
                        at = t + sta.mob.uniform(0.0, 0.999)
                        self._close(sta, at)
                        self._associate(sta, other, at)
                        return
            if u_drop < p.blind_spot_prob * mult:
                self._close(sta, t + sta.mob.uniform(0.0, 0.999))
                sta.reconnect_at = t + 1.0 + sta.mob.exponential(p.reconnect_mean_s)
        else:
            u_re = sta.mob.uniform()
            u_drop = sta.mob.uniform()
            if u_re < p.reassoc_prob * mult:
                at = t + sta.mob.uniform(0.0, 0.999)
                ap = sta.ap
                self._close(sta, at)
                self._associate(sta, ap, at)
            elif u_drop < p.inroom_disconnect_prob * mult:
                self._close(sta, t + sta.mob.uniform(0.0, 0.999))
                sta.reconnect_at = t + 1.0 + sta.mob.exponential(p.reconnect_mean_s)

    def _flow_matches(self, fidx: int, sta: _Station) -> bool:
        kind, arg = self.flow_targets[fidx]
        if kind == "all":
            return True
        if sta.extra:
            return False  # stations outside the plan only join catch-all flows
        if kind == "ap":
            return sta.home == arg
        return sta.sid in arg

    def _traffic_step(self, sta: _Station, t: int, burst: bool,
                      demand_down: list, demand_up: list) -> None:
        # activity evolves whether or not the station is associated
        u_act = sta.act.uniform()
        if sta.active:
            if u_act < self.p.activity_on_to_off:
                sta.active = False
        else:
            if u_act < self.p.activity_off_to_on:
                sta.active = True
        if sta.ap is None:
            return
        factor = 1.0 if sta.active else self.p.idle_rate_factor
        for fidx, flow in enumerate(self.spec.traffic.flows):
            if not self._flow_matches(fidx, sta):
                continue
            n = int(sta.traf.poisson(flow.rate_per_s * factor))
            if n == 0:
                continue
            sizes = np.maximum(np.rint(sta.traf.normal(flow.mean_bytes, flow.sd_bytes, size=n)), 1.0)
            if flow.direction in ("download", "bidirectional"):
                demand_down[sta.ap].append((sta, sizes))
            if flow.direction in ("upload", "bidirectional"):
                demand_up[sta.ap].append((sta, sizes))
        if burst and sta.ap == self.spec.anomaly.target_ap:
            n = int(sta.anom.poisson(self.p.burst_rate_per_s))
            if n:
                sizes = np.maximum(np.rint(sta.anom.normal(
                    self.p.burst_mean_bytes, self.p.burst_sd_bytes, size=n)), 1.0)
                demand_down[sta.ap].append((sta, sizes))

    def _deliver(self, t: int, noise_p: float, demand_down: list, demand_up: list) -> None:
        p = self.p
        up_noise_p = (1.0 + noise_p) / 2.0
        for ap in range(self.spec.topology.ap_count):
            total_down = sum(float(sizes.sum()) for _, sizes in demand_down[ap])
            saturated = total_down > p.downlink_capacity_Bps
            keep_cap = p.downlink_capacity_Bps / total_down if saturated else 1.0
            cap_rng = self.capacity[ap]
            for sta, sizes in demand_down[ap]:
                n = len(sizes)
                if saturated:
                    n = int(cap_rng.binomial(n, keep_cap))
                if n and noise_p < 1.0:
                    n = int(sta.anom.binomial(n, noise_p))
                if n:
                    sta.acc[1] += int(sizes[:n].sum())
                    sta.acc[3] += n
            for sta, sizes in demand_up[ap]:
                n = len(sizes)
                if saturated and p.uplink_saturated_keep < 1.0:
                    n = int(cap_rng.binomial(n, p.uplink_saturated_keep))
                if n and noise_p < 1.0:
                    n = int(sta.anom.binomial(n, up_noise_p))
                if n:
                    sta.acc[0] += int(sizes[:n].sum())
                    sta.acc[2] += n

    # -- main loop ------------------------------------------------------------

    def run(self) -> list[SessionEvent]:
        spec = self.spec
        for sid in range(spec.topology.sta_count):
            sta = _Station(sid, spec.topology.initial_assignment[sid],
                           spec.topology.mobility[sid], spec.seed)
            sta.active = sta.act.uniform() < 2.0 / 3.0
            self.stations.append(sta)
        # initial association inside the first second
        for sta in self.stations:
            home = sta.home
            if not self._halted(home, 0):
                self._associate(sta, home, sta.mob.uniform(0.0, 0.999))
            else:
                if sta.mobility == ROAMING and spec.topology.ap_count > 1 \
                        and not self._halted(1 - home, 0):
                    self._associate(sta, 1 - home, sta.mob.uniform(0.0, 0.999))
                else:
                    sta.reconnect_at = float(self.we)

        for t in range(self.duration):
            burst = self._burst_active(t)
            noise_p = self._noise_p(t)
            self.migrate_now = False
            self.migrate_target = 0
            self.migrate_slots = 0
            if spec.topology.ap_count > 1 and self.migration.uniform() < self.p.migration_rate:
                self.migrate_now = True
                self.migrate_target = int(self.migration.integers(0, spec.topology.ap_count))
                # never drain the source side completely
                eligible = sum(1 for s in self.stations
                               if s.mobility == ROAMING and s.ap is not None
                               and s.ap != self.migrate_target)
                self.migrate_slots = min(self.p.migration_max_movers, max(eligible - 1, 0))
            self._flash_events(t)
            for sta in self.stations:
                self._mobility_step(sta, t, burst, noise_p)
            demand_down = [[] for _ in range(spec.topology.ap_count)]
            demand_up = [[] for _ in range(spec.topology.ap_count)]
            for sta in self.stations:
                if t >= sta.suspended_until:
                    self._traffic_step(sta, t, burst, demand_down, demand_up)
            self._deliver(t, noise_p, demand_down, demand_up)

        for sta in self.stations:
            if sta.ap is not None:
                self._close(sta, float(self.duration))
        self.events.sort(key=lambda e: (e.start_s, e.ap_id, e.station_id))
        return self.events


def simulate(spec: ScenarioSpec) -> list[SessionEvent]:
    """Run one scenario and return its chronologically ordered session log."""
    spec.validate()
    return _Sim(spec).run()


def ground_truth(spec: ScenarioSpec) -> list[bool]:
    """Per-slot anomaly labels for a scenario.

    A slot is anomalous when it overlaps an active anomaly interval: the
    whole window for halt and noise, the burst phases for overload, and the
    slot containing the association/disassociation instant for flash crowds.
    """
    spec.validate()
    n_slots = spec.slot_count
    labels = [False] * n_slots
    a = spec.anomaly
    if a.kind == "none":
        return labels
    ws, we = a.window
    if a.kind in ("ap_halt", "noise"):
        intervals = [(ws, we)]
    elif a.kind == "overload":
        intervals = []
        period = a.burst_duration_s + a.sleep_duration_s
        start = ws
        while start < we:
            intervals.append((start, min(start + a.burst_duration_s, we)))
            start += period
    else:  # flash_crowd: the boundary slot of the instant
        if ws == we:
            return labels
        intervals = [(ws, min(ws + 1.0, we))]
    slot = spec.slot_length_s
    for lo, hi in intervals:
        if hi <= lo:
            continue
        first = int(lo // slot)
        last = int(math.ceil(hi / slot)) - 1
        for i in range(max(first, 0), min(last, n_slots - 1) + 1):
            labels[i] = True
    return labels


def normal_variant(spec: ScenarioSpec) -> ScenarioSpec:
    """The same scenario with the anomaly removed (for paired comparisons)."""
    return replace(spec, anomaly=AnomalySpec(kind="none"))


# -- session log I/O ----------------------------------------------------------

SESSION_COLUMNS = ("ap_id", "station_id", "start_s", "end_s",
                   "input_octets", "output_octets", "input_packets", "output_packets")


def format_session_log(events: list[SessionEvent]) -> str:
    lines = [",".join(SESSION_COLUMNS)]
    for e in events:
        lines.append(f"{e.ap_id},{e.station_id},{e.start_s:.3f},{e.end_s:.3f},"
                     f"{e.input_octets},{e.output_octets},{e.input_packets},{e.output_packets}")
    return "\n".join(lines) + "\n"


def parse_session_log(text: str) -> list[SessionEvent]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",") != list(SESSION_COLUMNS):
        raise ValidationError("session log: missing or malformed header row")
    events = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(SESSION_COLUMNS):
            raise ValidationError(f"session log: bad row {ln!r}")
        try:
            events.append(SessionEvent(
                ap_id=int(parts[0]), station_id=int(parts[1]),
                start_s=float(parts[2]), end_s=float(parts[3]),
                input_octets=int(parts[4]), output_octets=int(parts[5]),
                input_packets=int(parts[6]), output_packets=int(parts[7])))
        except ValueError as exc:
            raise ValidationError(f"session log: bad row {ln!r}") from exc
    return events
