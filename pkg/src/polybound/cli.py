"""Command-line client for the bound-verification service.

Each command serializes its arguments into a RunConfig, posts it to the
service - in-process by default, or a remote --server URL - and writes the
response body verbatim, so identical configs give byte-identical outputs.
Human-oriented summaries go to stderr; the threshold command additionally
prints its verdict to stdout.

Exit codes: 0 = success / all certified, 2 = certified counterexample found
(verify only), 1 = usage or runtime error.
"""

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from .api.models import RunConfig

ENV_DIGITS = "POLYBOUND_DIGITS"

_EVAL_FNS = ("digamma", "polygamma", "root_norm", "exp_neg_psi", "digamma_inverse")
_FIXED_FORMAT = {"eval": "json", "verify": "json", "report": "csv", "threshold": "json"}


class CliError(Exception):
    """A usage problem detected before anything runs."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, help="working precision in decimal digits (default 40, or $POLYBOUND_DIGITS)")
    common.add_argument("--out", help="write the response body to this path")
    common.add_argument("--server", help="remote service URL (default: run in-process)")
    common.add_argument("--format", choices=("json", "csv"), help="output format (search only; other commands are fixed)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--x-min", help="grid lower endpoint (decimal string)")
    grid.add_argument("--x-max", help="grid upper endpoint (decimal string)")
    grid.add_argument("--points", type=int, help="number of grid points")
    grid.add_argument("--spacing", choices=("log", "linear", "random"), help="grid spacing (default log)")
    grid.add_argument("--seed", type=int, help="seed for random spacing")

    selection = argparse.ArgumentParser(add_help=False)
    selection.add_argument("--bounds", default="all", help='comma-separated bound ids, or "all"')
    selection.add_argument("--n", type=int, help="fix the derivative order n")
    selection.add_argument("--k", type=int, help="fix the lower order k")
    selection.add_argument("--n-max", type=int, help="expand n up to this cap (default 4)")
    selection.add_argument("--k-max", type=int, help="expand k up to this cap (default 3)")
    selection.add_argument("--exploratory", action="store_true", help="lift the B06 order cap")

    parser = argparse.ArgumentParser(prog="polybound", description="Verified polygamma bound checking and constant search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate one quantity with its error radius")
    p_eval.add_argument("--fn", required=True, choices=_EVAL_FNS)
    p_eval.add_argument("--x", required=True, help="abscissa (decimal string)")
    p_eval.add_argument("--n", type=int, help="derivative order, for polygamma/root_norm")

    sub.add_parser("verify", parents=[common, grid, selection], help="sweep bound cases and report margins")
    sub.add_parser("report", parents=[common, grid, selection], help="per-sample margins as CSV")

    p_search = sub.add_parser("search", parents=[common, grid], help="best-constant estimates or the critical-shift curve")
    p_search.add_argument("--n", type=int, required=True)
    p_search.add_argument("--k", type=int, help="lower order for the (n, k) constant family")
    p_search.add_argument("--order", help="generalized-mean order (default -1, the logarithmic mean)")

    p_threshold = sub.add_parser("threshold", parents=[common, grid], help="smallest n with a certified B06 counterexample")
    p_threshold.add_argument("--n-cap", type=int, default=64)

    p_serve = sub.add_parser("serve", help="run the HTTP service (requires uvicorn)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def _resolve_digits(args) -> int | None:
    if args.digits is not None:
        return args.digits
    raw = os.environ.get(ENV_DIGITS)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{ENV_DIGITS} must be an integer, got {raw!r}") from None


def _resolve_format(args) -> str:
    fixed = _FIXED_FORMAT.get(args.command)
    if fixed is None:  # search honors the flag
        return args.format or "json"
    if args.format is not None and args.format != fixed:
        raise CliError(f"{args.command} always emits {fixed}; drop --format {args.format}")
    return fixed


def _build_config(args) -> RunConfig:
    fields = {
        key: value
        for key, value in vars(args).items()
        if key in RunConfig.model_fields and value is not None
    }
    # The output path never reaches the server: it does not affect the result,
    # and keeping it out of the echoed config lets two runs that differ only
    # in --out produce byte-identical bodies.
    fields.pop("out", None)
    fields["command"] = args.command
    fields["format"] = _resolve_format(args)
    digits = _resolve_digits(args)
    if digits is not None:
        fields["digits"] = digits
    return RunConfig(**fields)


async def _post(server: str | None, command: str, config: RunConfig) -> httpx.Response:
    if server is None:
        from .api.app import app

        client = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app), base_url="http://polybound.internal", timeout=None
        )
    else:
        client = httpx.AsyncClient(base_url=server, timeout=None)
    async with client:
        return await client.post(f"/{command}", json=config.model_dump(mode="json"))


def _error_detail(response: httpx.Response) -> str:
    try:
        return str(response.json()["detail"])
    except (ValueError, KeyError):
        return response.text[:500]


def _serve(args) -> int:
    try:
        import uvicorn
    except ImportError:
        print("error: serve requires uvicorn (pip install uvicorn)", file=sys.stderr)
        return 1
    from .api.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    try:
        config = _build_config(args)
    except (CliError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        response = asyncio.run(_post(args.server, args.command, config))
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if response.status_code != 200:
        print(f"error: {_error_detail(response)}", file=sys.stderr)
        return 1

    body = response.content
    if args.out:
        Path(args.out).write_bytes(body)
    is_json = response.headers.get("content-type", "").startswith("application/json")
    payload = json.loads(body) if is_json else None

    if args.command == "eval":
        print(payload["pretty"])
        return 0
    if not args.out:
        text = body.decode()
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if args.command == "verify":
        if payload["counterexample_count"] > 0:
            print(f"certified counterexamples: {payload['counterexample_count']}", file=sys.stderr)
            return 2
        if payload["all_certified"]:
            total = sum(r["samples"] for r in payload["reports"])
            print(
                f"all certified: {len(payload['reports'])} case(s), {total} samples",
                file=sys.stderr,
            )
        else:
            print(f"no counterexamples; uncertified points: {payload['uncertified_count']}", file=sys.stderr)
    elif args.command == "threshold":
        if payload["n_failed"] is None:
            print(f"no failing order up to n_cap = {payload['n_cap']}")
        else:
            witness = payload["witness"]
            print(
                f"smallest failing n = {payload['n_failed']} "
                f"(witness x = {witness['x']}, margin = {witness['margin']})"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
