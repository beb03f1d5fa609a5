"""Command-line front end.

The CLI is a thin client of the HTTP service: it resolves the
configuration (file or defaults, plus the --seed override), posts one
request, and writes the returned artifacts verbatim into the output
directory.  Without --server the service runs in-process over an ASGI
transport, so no daemon is needed; with --server URL the same requests go
over the wire.

Exit codes: 0 success (flagged results included), 2 configuration/usage
errors, 3 I/O and transport errors.
"""

import argparse
import asyncio
import json
import os
import sys

import httpx
from pydantic import ValidationError

from .config import ChainConfig, default_config, format_validation_error
from .service.app import create_app
from .workflows import ProtocolSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

_TIMEOUT = httpx.Timeout(600.0)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _add_common(parser, suppress):
    # Subparsers re-declare the globals with SUPPRESS defaults so a flag
    # given before the subcommand is not clobbered by the subparser's
    # default, and flags work on either side of the subcommand.
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=d,
                        help="chain configuration JSON (defaults built in)")
    parser.add_argument("--seed", type=int, metavar="N", default=d,
                        help="override analysis.seed")
    parser.add_argument("--out", metavar="DIR", default=d,
                        help="output directory (default: current)")
    parser.add_argument("--dry-run", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="validate inputs and write nothing")
    parser.add_argument("--server", metavar="URL", default=d,
                        help="use a running service instead of in-process")


def build_parser():
    sub_common = argparse.ArgumentParser(add_help=False)
    _add_common(sub_common, suppress=True)

    parser = argparse.ArgumentParser(
        prog="rfchain",
        description="Reflectometry readout-chain simulator and analyzer")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.add_parser("match", parents=[sub_common],
                   help="reflection scan over varactor biases")
    p_spec = sub.add_parser("spectrum", parents=[sub_common],
                            help="synthesize a spectrum, or analyze one")
    p_spec.add_argument("--analyze", metavar="FILE",
                        help="analyze this trace instead of synthesizing")
    sub.add_parser("readout", parents=[sub_common],
                   help="readout-time sweep over drive power")
    sub.add_parser("stability", parents=[sub_common],
                   help="charge-stability grid with demodulated voltage")
    p_opt = sub.add_parser("optimize", parents=[sub_common],
                           help="run a sweep-protocol file")
    p_opt.add_argument("protocol", metavar="PROTOCOL",
                       help="protocol JSON file")
    return parser


def _read_text(path, what):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc}", EXIT_IO) from None


def resolve_config(args) -> ChainConfig:
    if args.config is not None:
        text = _read_text(args.config, "config")
        try:
            cfg = ChainConfig.model_validate(json.loads(text))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: invalid JSON ({exc})",
                           EXIT_CONFIG) from None
        except ValidationError as exc:
            raise CliError(f"{args.config}:\n{format_validation_error(exc)}",
                           EXIT_CONFIG) from None
    else:
        cfg = default_config()
    if args.seed is not None:
        if args.seed < 0:
            raise CliError("--seed must be non-negative", EXIT_CONFIG)
        analysis = cfg.analysis.model_copy(update={"seed": args.seed})
        cfg = cfg.model_copy(update={"analysis": analysis})
    return cfg


def resolve_protocol(path) -> ProtocolSpec:
    text = _read_text(path, "protocol")
    try:
        return ProtocolSpec.model_validate(json.loads(text))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})", EXIT_CONFIG) from None
    except ValidationError as exc:
        raise CliError(f"{path}:\n{format_validation_error(exc)}",
                       EXIT_CONFIG) from None


def call_service(args, path, payload):
    async def _go():
        if args.server:
            client = httpx.AsyncClient(base_url=args.server, timeout=_TIMEOUT)
        else:
            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(transport=transport, timeout=_TIMEOUT,
                                       base_url="http://rfchain.internal")
        async with client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(_go())
    except httpx.HTTPError as exc:
        raise CliError(f"service unreachable: {exc}", EXIT_IO) from None
    if response.status_code in (400, 422):
        detail = response.json().get("detail")
        if isinstance(detail, list):
            detail = "\n".join(f"{d.get('path', '?')}: {d.get('message', d)}"
                               if isinstance(d, dict) else str(d)
                               for d in detail)
        raise CliError(f"invalid request:\n{detail}", EXIT_CONFIG)
    if response.status_code != 200:
        raise CliError(
            f"service error {response.status_code}: {response.text}", EXIT_IO)
    return response.json()


def write_files(out_dir, files):
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, text in sorted(files.items()):
            with open(os.path.join(out_dir, name), "w", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write outputs: {exc}", EXIT_IO) from None


def _fmt(value, scale=1.0, unit=""):
    if value is None:
        return "flagged"
    return f"{value * scale:.6g}{unit}"


def _summary_line(command, summary):
    if command == "match":
        best = summary["best"]
        return (f"best match: V_S={best['v_s']:g} "
                f"f_C={best['f_c_hz'] / 1e6:.4f} MHz "
                f"depth={best['depth_db']:.2f} dB")
    if command == "spectrum":
        s = summary["sensitivity"]
        parts = [f"SNR={_fmt(s['snr_db'])} dB"]
        if s["s_c_f_per_rthz"] is not None:
            parts.append(f"S_C={_fmt(s['s_c_f_per_rthz'], 1e18)} aF/rtHz")
        if s["s_q_e_per_rthz"] is not None:
            parts.append(f"S_Q={_fmt(s['s_q_e_per_rthz'], 1e6)} ue/rtHz")
        if s["s_s_c_per_rthz"] is not None:
            parts.append(f"S_S={_fmt(s['s_s_c_per_rthz'])} C/rtHz")
        if s["flagged"]:
            parts.append("FLAGGED")
        return "sensitivity: " + ", ".join(parts)
    if command == "readout":
        best = summary["best"]
        return (f"best readout: tau={best['tau_s'] * 1e9:.3f} ns at "
                f"P1={best['p1_dbm']:g} dBm")
    if command == "stability":
        return (f"stability grid {summary['n_v_l']}x{summary['n_v_b']} at "
                f"f_C={summary['f_c_hz'] / 1e6:.4f} MHz")
    if command == "optimize":
        best = summary["best_sensitivity"]
        return (f"{summary['n_passes']} pass(es), best sensitivity="
                f"{'flagged' if best is None else format(best, '.6g')}")
    return "done"


def run(args) -> int:
    cfg = resolve_config(args)
    payload = {"config": cfg.model_dump(mode="json")}
    protocol = None
    if args.command == "optimize":
        protocol = resolve_protocol(args.protocol)
        payload["protocol"] = protocol.model_dump(mode="json")

    if args.dry_run:
        validate_payload = {"config": payload["config"]}
        if protocol is not None:
            validate_payload["protocol"] = payload["protocol"]
        body = call_service(args, "/validate", validate_payload)
        n = body.get("n_protocol_passes")
        extra = f", protocol valid ({n} passes)" if n is not None else ""
        print(f"configuration valid{extra}; nothing written (--dry-run)")
        return EXIT_OK

    if args.command == "spectrum" and args.analyze is not None:
        payload["csv_text"] = _read_text(args.analyze, "spectrum")
        endpoint = "/spectrum/analyze"
    elif args.command == "spectrum":
        endpoint = "/spectrum/synthesize"
    elif args.command == "optimize":
        endpoint = "/optimize"
    else:
        endpoint = f"/{args.command}"

    body = call_service(args, endpoint, payload)
    out_dir = args.out or "."
    write_files(out_dir, body["files"])
    for name in sorted(body["files"]):
        print(f"wrote {os.path.join(out_dir, name)}")
    print(_summary_line(args.command, body["summary"]))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return run(args)
    except CliError as exc:
        print(f"rfchain: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
