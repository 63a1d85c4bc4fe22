"""Line-oriented traffic scripts (``.tgen``), MGEN-flavoured.

    <t_s> ON <flow> SRC <node> DST <node> <PERIODIC|POISSON|BURST> [<pps> <bytes>]
    <t_s> OFF <flow>

``#`` starts a comment. Times are decimal seconds with at most millisecond
resolution.
"""

import re
from decimal import Decimal, InvalidOperation

from .errors import FormatSyntaxError, InvariantError
from .model import FlowEvent, FlowKind, Pattern, TrafficScenario, validate_traffic

_ON = re.compile(
    r"^(?P<t>\S+)\s+ON\s+(?P<flow>\d+)\s+SRC\s+(?P<src>\d+)\s+DST\s+(?P<dst>\d+)\s+"
    r"(?P<pat>PERIODIC|POISSON|BURST)\s+\[\s*(?P<rate>\S+)\s+(?P<size>\d+)\s*\]$"
)
_OFF = re.compile(r"^(?P<t>\S+)\s+OFF\s+(?P<flow>\d+)$")


def _time_ms(tok, lineno):
    try:
        t = Decimal(tok)
    except InvalidOperation:
        raise FormatSyntaxError(f"bad time {tok!r}", f"line {lineno}") from None
    ms = t * 1000
    if not t.is_finite() or ms != ms.to_integral_value() or t < 0:
        raise FormatSyntaxError(f"time {tok!r} is not a non-negative whole millisecond", f"line {lineno}")
    return int(ms)


def _rate(tok, lineno):
    try:
        r = float(tok)
    except ValueError:
        raise FormatSyntaxError(f"bad rate {tok!r}", f"line {lineno}") from None
    return r


def parse_traffic_script(text, scenario_id="traffic") -> TrafficScenario:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    events = []
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ON.match(line)
        if m:
            ev = FlowEvent(
                t_ms=_time_ms(m["t"], lineno), kind=FlowKind.ON, flow_id=int(m["flow"]),
                src_node=int(m["src"]), dst_node=int(m["dst"]), pattern=Pattern(m["pat"]),
                rate_pps=_rate(m["rate"], lineno), size_bytes=int(m["size"]))
        else:
            m = _OFF.match(line)
            if not m:
                raise FormatSyntaxError(f"malformed line: {raw.strip()!r}", f"line {lineno}")
            ev = FlowEvent(t_ms=_time_ms(m["t"], lineno), kind=FlowKind.OFF, flow_id=int(m["flow"]))
        events.append(ev)
        lines.append(lineno)
    # stable sort keeps file order for equal times
    order = sorted(range(len(events)), key=lambda i: events[i].t_ms)
    scn = TrafficScenario(scenario_id, tuple(events[i] for i in order))
    try:
        validate_traffic(scn)
    except InvariantError as exc:
        # report the script line rather than the event index
        idx = int(exc.location.split("[")[1].rstrip("]"))
        raise InvariantError(exc.rule, f"line {lines[order[idx]]}") from None
    return scn


def _fmt_time(t_ms):
    return f"{t_ms // 1000}.{t_ms % 1000:03d}"


def _fmt_rate(r):
    return str(int(r)) if float(r).is_integer() else repr(float(r))


def serialize_traffic_script(s: TrafficScenario) -> str:
    out = [f"# traffic scenario {s.id}"]
    for e in s.events:
        if e.kind is FlowKind.ON:
            out.append(
                f"{_fmt_time(e.t_ms)} ON {e.flow_id} SRC {e.src_node} DST {e.dst_node} "
                f"{e.pattern.value} [{_fmt_rate(e.rate_pps)} {e.size_bytes}]")
        else:
            out.append(f"{_fmt_time(e.t_ms)} OFF {e.flow_id}")
    return "\n".join(out) + "\n"


def read_traffic_script(path, scenario_id=None):
    from pathlib import Path

    p = Path(path)
    return parse_traffic_script(p.read_text(encoding="utf-8"), scenario_id or p.stem)
