"""``.rfscn`` reader and canonical writer.

The document is JSON. Real numbers are written as decimal strings (the
shortest repr that round-trips a double) so ``-inf`` noise and every gain
survive a write/read cycle exactly. Integers stay JSON integers. Keys are
sorted and every link sits on its own line, which keeps diffs readable.
"""

import json
import math

from .errors import FormatSyntaxError, InvariantError, MissingFieldError, UnknownFieldError
from .model import RfScenario, TapUpdate, make_cir, validate_rf_scenario

_TOP = {"id", "n_nodes", "duration_ms", "sample_rate_hz", "carrier_hz", "noise_power_dbfs", "updates"}
_UPDATE = {"t_ms", "carrier_hz", "links"}
_LINK = {"tx", "rx", "taps"}
_TAP = {"k", "re", "im"}


def format_real(x):
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN is not serialisable")
    return repr(x)


def _no_dupes(pairs):
    d = {}
    for k, v in pairs:
        if k in d:
            raise FormatSyntaxError(f"duplicate key {k!r}")
        d[k] = v
    return d


def load_json(data):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatSyntaxError(f"not UTF-8 ({exc.reason})", f"byte {exc.start}") from None
    try:
        return json.loads(data, object_pairs_hook=_no_dupes)
    except json.JSONDecodeError as exc:
        raise FormatSyntaxError(exc.msg, f"line {exc.lineno} col {exc.colno}") from None


def check_fields(obj, path, allowed, required):
    if not isinstance(obj, dict):
        raise InvariantError("expected an object", path or "<root>")
    for k in obj:
        if k not in allowed:
            raise UnknownFieldError(f"{k!r}", f"{path}.{k}" if path else k)
    for k in required:
        if k not in obj:
            raise MissingFieldError(f"{k!r} is required", f"{path}.{k}" if path else k)


def get_int(obj, key, path):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvariantError(f"expected an integer, got {v!r}", path)
    return v


def get_real(obj, key, path):
    v = obj[key]
    if isinstance(v, bool):
        raise InvariantError(f"expected a real number, got {v!r}", path)
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            x = float(v)
        except ValueError:
            raise InvariantError(f"not a decimal number: {v!r}", path) from None
        if math.isnan(x):
            raise InvariantError("NaN is not allowed", path)
        return x
    raise InvariantError(f"expected a real number, got {v!r}", path)


def get_str(obj, key, path):
    v = obj[key]
    if not isinstance(v, str):
        raise InvariantError(f"expected a string, got {v!r}", path)
    return v


def rf_from_dict(doc):
    check_fields(doc, "", _TOP, _TOP)
    if not isinstance(doc["updates"], list):
        raise InvariantError("expected a list", "updates")
    updates = []
    for ui, u in enumerate(doc["updates"]):
        up = f"updates[{ui}]"
        check_fields(u, up, _UPDATE, {"t_ms", "links"})
        if not isinstance(u["links"], list):
            raise InvariantError("expected a list", f"{up}.links")
        links = []
        for li, link in enumerate(u["links"]):
            lp = f"{up}.links[{li}]"
            check_fields(link, lp, _LINK, _LINK)
            if not isinstance(link["taps"], list):
                raise InvariantError("expected a list", f"{lp}.taps")
            taps = []
            for ti, tap in enumerate(link["taps"]):
                tp = f"{lp}.taps[{ti}]"
                check_fields(tap, tp, _TAP, _TAP)
                g = complex(get_real(tap, "re", f"{tp}.re"), get_real(tap, "im", f"{tp}.im"))
                taps.append((get_int(tap, "k", f"{tp}.k"), g))
            tx = get_int(link, "tx", f"{lp}.tx")
            rx = get_int(link, "rx", f"{lp}.rx")
            links.append(make_cir(tx, rx, taps, lp))
        carrier = get_real(u, "carrier_hz", f"{up}.carrier_hz") if "carrier_hz" in u else None
        updates.append(TapUpdate(get_int(u, "t_ms", f"{up}.t_ms"), tuple(links), carrier))
    scn = RfScenario(
        id=get_str(doc, "id", "id"),
        n_nodes=get_int(doc, "n_nodes", "n_nodes"),
        duration_ms=get_int(doc, "duration_ms", "duration_ms"),
        sample_rate_hz=get_real(doc, "sample_rate_hz", "sample_rate_hz"),
        carrier_hz=get_real(doc, "carrier_hz", "carrier_hz"),
        noise_power_dbfs=get_real(doc, "noise_power_dbfs", "noise_power_dbfs"),
        updates=tuple(updates),
    )
    validate_rf_scenario(scn)
    return scn


def parse_rf_scenario(data) -> RfScenario:
    """Parse and fully validate an ``.rfscn`` document (bytes or str)."""
    return rf_from_dict(load_json(data))


def _link_json(link):
    taps = [{"im": format_real(g.imag), "k": k, "re": format_real(g.real)} for k, g in link.taps]
    return json.dumps({"rx": link.rx, "taps": taps, "tx": link.tx}, sort_keys=True)


def serialize_rf_scenario(s: RfScenario) -> bytes:
    out = ["{"]
    out.append(f' "carrier_hz": {json.dumps(format_real(s.carrier_hz))},')
    out.append(f' "duration_ms": {int(s.duration_ms)},')
    out.append(f' "id": {json.dumps(s.id)},')
    out.append(f' "n_nodes": {int(s.n_nodes)},')
    out.append(f' "noise_power_dbfs": {json.dumps(format_real(s.noise_power_dbfs))},')
    out.append(f' "sample_rate_hz": {json.dumps(format_real(s.sample_rate_hz))},')
    out.append(' "updates": [')
    for ui, u in enumerate(s.updates):
        head = "  {"
        if u.carrier_hz is not None:
            head += f'"carrier_hz": {json.dumps(format_real(u.carrier_hz))}, '
        out.append(head + '"links": [')
        for li, link in enumerate(u.links):
            sep = "," if li < len(u.links) - 1 else ""
            out.append(f"   {_link_json(link)}{sep}")
        sep = "," if ui < len(s.updates) - 1 else ""
        out.append(f'  ], "t_ms": {int(u.t_ms)}}}{sep}')
    out.append(" ]")
    out.append("}")
    return ("\n".join(out) + "\n").encode("utf-8")


def read_rf_scenario(path):
    with open(path, "rb") as fh:
        return parse_rf_scenario(fh.read())


def write_rf_scenario(path, s: RfScenario):
    with open(path, "wb") as fh:
        fh.write(serialize_rf_scenario(s))
