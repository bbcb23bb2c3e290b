"""Command-line front end.

Verbs: run-local, serve, connect, estimate, derive-crs, dump-params.
Exit codes: 0 ok, 2 protocol abort, 3 decode/transport error, 4 config error.

Options resolve as defaults < config file (flat `key = value` lines) <
GZOT_SEED environment variable (seed only) < command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys

from . import get_scheme
from .core import ConfigError, DecodeError, GzotError, ProtocolAbort, RhoMode, SigmaMode, check_crs_consistency
from .estimators import SUITES, append_report, run_suite
from .ot import (
    MSG_FLOW1,
    MSG_FLOW2,
    _HEADER,
    decode_flow1_payload,
    decode_flow2_payload,
    decode_frame,
    derive_crs,
    encode_flow1,
    encode_flow2,
    receiver_init,
    run_protocol,
    sender_respond,
)
from .util import Rng

_DEFAULTS = {
    "inst": "dh",
    "preset": "test",
    "sid": "0000000000000001",
    "seed": "1",
    "host": "127.0.0.1",
    "port": "7683",
    "trials": "1000",
    "workers": "1",
    "timeout": "30",
    "sigma_mode": "S0",
    "rho_mode": "R0",
    "mode": "choice",
}

_SIGMA_MODES = {m.value: m for m in SigmaMode}
_RHO_MODES = {m.value: m for m in RhoMode}


def _parse_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{ln}: expected `key = value`")
                k, v = line.split("=", 1)
                out[k.strip().replace("-", "_")] = v.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_parse_config_file(args.config))
    if os.environ.get("GZOT_SEED"):
        cfg["seed"] = os.environ["GZOT_SEED"]
    for k, v in vars(args).items():
        if v is not None and k not in ("command", "config"):
            cfg[k] = v
    return cfg


def _sid(cfg) -> bytes:
    try:
        sid = bytes.fromhex(cfg["sid"])
    except ValueError as exc:
        raise ConfigError("sid must be hex") from exc
    if len(sid) != 8:
        raise ConfigError("sid must be exactly 8 bytes of hex")
    return sid


def _int(cfg, key) -> int:
    try:
        return int(cfg[key])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad integer for {key!r}") from exc


def _msg(cfg, key) -> bytes:
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"missing message {key!r}")
    try:
        return bytes.fromhex(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be hex") from exc


def _scheme(cfg):
    return get_scheme(cfg["inst"], cfg["preset"])


def _check_msg_len(scheme, m0: bytes, m1: bytes):
    if len(m0) != len(m1):
        raise ConfigError("m0 and m1 must have equal length")
    if scheme.kappa_bits is not None and 8 * len(m0) != scheme.kappa_bits:
        raise ConfigError(
            f"this instantiation transfers exactly {scheme.kappa_bits // 8}-byte messages"
        )


def cmd_run_local(cfg) -> int:
    scheme = _scheme(cfg)
    sid = _sid(cfg)
    b = _int(cfg, "b")
    if b not in (0, 1):
        raise ConfigError("b must be 0 or 1")
    m0, m1 = _msg(cfg, "m0"), _msg(cfg, "m1")
    _check_msg_len(scheme, m0, m1)
    crs = derive_crs(sid, scheme)
    rng = Rng(_int(cfg, "seed"))
    out, f1, f2 = run_protocol(crs, sid, b, m0, m1, rng)
    print(f"flow1 {f1.hex()}")
    print(f"flow2 {f2.hex()}")
    print(f"result {out.hex()}")
    return 0


def _read_frame(sock: socket.socket) -> bytes:
    def read_exact(k: int) -> bytes:
        buf = b""
        while len(buf) < k:
            try:
                chunk = sock.recv(k - len(buf))
            except socket.timeout as exc:
                raise DecodeError("peer timed out") from exc
            if not chunk:
                raise DecodeError("connection closed mid-frame")
            buf += chunk
        return buf

    head = read_exact(_HEADER.size)
    plen = int.from_bytes(head[-4:], "big")
    if plen > (1 << 28):
        raise DecodeError("oversized frame")
    return head + read_exact(plen)


def cmd_serve(cfg) -> int:
    scheme = _scheme(cfg)
    sid = _sid(cfg)
    m0, m1 = _msg(cfg, "m0"), _msg(cfg, "m1")
    _check_msg_len(scheme, m0, m1)
    crs = derive_crs(sid, scheme)
    rng = Rng(_int(cfg, "seed")).derive("sender")
    timeout = _int(cfg, "timeout")
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as srv:
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((cfg["host"], _int(cfg, "port")))
        srv.listen(1)
        srv.settimeout(timeout)
        print(f"listening on {cfg['host']}:{srv.getsockname()[1]}", file=sys.stderr)
        try:
            conn, peer = srv.accept()
        except socket.timeout as exc:
            raise DecodeError("no connection before timeout") from exc
        with conn:
            conn.settimeout(timeout)
            msg_type, got_sid, tag, payload = decode_frame(_read_frame(conn))
            if msg_type != MSG_FLOW1:
                raise DecodeError("expected flow 1")
            if tag != scheme.tag:
                raise DecodeError("instantiation tag mismatch")
            if got_sid != sid:
                raise ProtocolAbort("session id mismatch")
            flow2 = sender_respond(crs, m0, m1, decode_flow1_payload(payload), rng)
            conn.sendall(encode_flow2(sid, scheme.tag, flow2))
    print("sent flow2; done")
    return 0


def cmd_connect(cfg) -> int:
    scheme = _scheme(cfg)
    sid = _sid(cfg)
    b = _int(cfg, "b")
    if b not in (0, 1):
        raise ConfigError("b must be 0 or 1")
    crs = derive_crs(sid, scheme)
    rng = Rng(_int(cfg, "seed")).derive("receiver")
    timeout = _int(cfg, "timeout")
    session = None
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.settimeout(timeout)
        try:
            sock.connect((cfg["host"], _int(cfg, "port")))
        except OSError as exc:
            raise DecodeError(f"connect failed: {exc}") from exc
        session, flow1 = receiver_init(crs, sid, b, rng)
        sock.sendall(encode_flow1(sid, scheme.tag, flow1))
        msg_type, got_sid, tag, payload = decode_frame(_read_frame(sock))
        if msg_type != MSG_FLOW2:
            raise DecodeError("expected flow 2")
        if tag != scheme.tag or got_sid != sid:
            raise DecodeError("frame does not match session")
        out = session.finish(decode_flow2_payload(payload))
    print(f"result {out.hex()}")
    return 0


def cmd_estimate(cfg) -> int:
    name = cfg.get("suite")
    if not name:
        raise ConfigError(f"--suite required; one of {sorted(SUITES)}")
    kwargs = {}
    if name == "extraction":
        kwargs["mode"] = cfg["mode"]
    if name == "kfold" and "plant_prob" in cfg:
        kwargs["plant_prob"] = float(cfg["plant_prob"])
    report = run_suite(
        name,
        inst=cfg["inst"],
        preset=cfg["preset"],
        trials=_int(cfg, "trials"),
        seed=_int(cfg, "seed"),
        workers=_int(cfg, "workers"),
        **kwargs,
    )
    line = report.to_json()
    print(line)
    if cfg.get("report"):
        append_report(cfg["report"], report)
    return 0


def cmd_derive_crs(cfg) -> int:
    scheme = _scheme(cfg)
    sid = _sid(cfg)
    s_mode = _SIGMA_MODES.get(cfg["sigma_mode"])
    r_mode = _RHO_MODES.get(cfg["rho_mode"])
    if s_mode is None or r_mode is None:
        raise ConfigError("sigma-mode must be S0/S1; rho-mode must be R0/R1/R1prime")
    crs = derive_crs(sid, scheme, s_mode, r_mode)
    print(f"crs {crs.public_bytes().hex()}")
    print(f"sigma_mode {s_mode.value} rho_mode {r_mode.value}")
    print(f"td_sigma {'present' if crs.td_sigma is not None else 'absent'}")
    print(f"td_rho {'present' if crs.td_rho is not None else 'absent'}")
    print(f"consistent {check_crs_consistency(crs)}")
    return 0


def cmd_dump_params(cfg) -> int:
    from .dh import GROUP_PRESETS, get_group
    from .lwe import PRESETS as LWE_PRESETS
    from .lwe import get_params

    doc = {"dh": {}, "lwe": {}}
    for name in GROUP_PRESETS:
        g = get_group(name)
        doc["dh"][name] = {"p": g.p, "q": g.q, "g": g.g, "elem_bytes": g.elem_width}
    for name in LWE_PRESETS:
        doc["lwe"][name] = get_params(name).describe()
    print(json.dumps(doc, indent=2, default=str))
    return 0


_COMMANDS = {
    "run-local": cmd_run_local,
    "serve": cmd_serve,
    "connect": cmd_connect,
    "estimate": cmd_estimate,
    "derive-crs": cmd_derive_crs,
    "dump-params": cmd_dump_params,
}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="gzot", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file; flags win")
        p.add_argument("--inst", choices=("dh", "lwe"))
        p.add_argument("--preset")
        p.add_argument("--sid", help="8-byte hex session id")
        p.add_argument("--seed")
        if name in ("run-local", "serve", "connect"):
            p.add_argument("--b")
            p.add_argument("--m0", help="message 0, hex")
            p.add_argument("--m1", help="message 1, hex")
        if name in ("serve", "connect"):
            p.add_argument("--host")
            p.add_argument("--port")
            p.add_argument("--timeout")
        if name == "estimate":
            p.add_argument("--suite", choices=sorted(SUITES))
            p.add_argument("--trials")
            p.add_argument("--workers")
            p.add_argument("--mode", choices=("choice", "messages"))
            p.add_argument("--plant-prob", dest="plant_prob")
            p.add_argument("--report", help="append the JSON report line to this file")
        if name == "derive-crs":
            p.add_argument("--sigma-mode", dest="sigma_mode", choices=sorted(_SIGMA_MODES))
            p.add_argument("--rho-mode", dest="rho_mode", choices=sorted(_RHO_MODES))
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except DecodeError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return 3
    except ProtocolAbort as exc:
        print(f"protocol abort: {exc}", file=sys.stderr)
        return 2
    except GzotError as exc:  # pragma: no cover - catch-all for library errors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
