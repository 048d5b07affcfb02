"""Command-line front end: ``paschke <command> [--in PATH | --fixture NAME | JSON]``.

Every command prints one canonical JSON object (sorted keys, a top-level
``"schema_version": 1``) on standard output. Exit codes: 0 success,
1 malformed or schema-violating input, 2 domain error, 3 numerical
degeneracy or a failed postcondition.
"""
import argparse
import json
import sys

import numpy as np

from . import corpus as corpus_mod
from . import cp_map as cm
from . import fixtures, purity, serialize, settings
from .dilation import (inflate, mediating_map, mediating_map_via_isometry, minimal_stinespring, paschke_dilate,
                       verify_dilation)
from .dilation.mediate import mediator_residuals
from .errors import DomainError, NumericalDegeneracyError, PaschkeError, StructuralError, VerificationError
from .vn_algebra import central_carrier, wedderburn
from .vn_algebra import linalg

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3

CHANNEL_COMMANDS = ("dilate", "stinespring", "verify", "purity", "extreme", "carrier")
COMMANDS = CHANNEL_COMMANDS + ("corner", "compress", "wedderburn", "subchannel", "mediate", "corpus")


class InputError(Exception):
    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details


def _read_input(args):
    if args.fixture is not None:
        return None
    if args.input_path is not None:
        text = sys.stdin.read() if args.input_path == "-" else open(args.input_path, encoding="utf-8").read()
    elif args.inline is not None:
        text = args.inline
    else:
        raise InputError("no input: pass --in PATH, --fixture NAME or inline JSON")
    try:
        return serialize.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}",
                         line=exc.lineno, column=exc.colno, position=exc.pos) from None


def _channel(args, data):
    if args.fixture is not None:
        try:
            return fixtures.get(args.fixture)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    if isinstance(data, dict) and "channel" in data:
        data = data["channel"]
    return serialize.cpmap_from_json(data)


# commands ----------------------------------------------------------------------
def cmd_dilate(args, data):
    return serialize.dilation_to_json(paschke_dilate(_channel(args, data), seed=args.seed))


def cmd_stinespring(args, data):
    return serialize.stinespring_to_json(minimal_stinespring(_channel(args, data)))


def cmd_verify(args, data):
    dil = paschke_dilate(_channel(args, data), seed=args.seed)
    report = verify_dilation(dil, seed=args.seed)
    return {"ok": report["ok"], "checks": report["checks"], "P": serialize.algebra_to_json(dil.P),
            "seed": args.seed}


def cmd_purity(args, data):
    return purity.purity_report(_channel(args, data), seed=args.seed)


def cmd_extreme(args, data):
    phi = _channel(args, data)
    out = {"ncp_extreme": purity.is_ncp_extreme(phi, seed=args.seed), "seed": args.seed}
    if phi.domain.dim <= corpus_mod.BRUTE_FORCE_MAX_DIM:
        witness = purity.find_extremality_witness(phi, np.random.default_rng(args.seed))
        out["witness"] = None if witness is None else [serialize.cpmap_to_json(w) for w in witness]
    return out


def cmd_carrier(args, data):
    car = cm.carrier(_channel(args, data))
    return {"carrier": car, "central_carrier": central_carrier(car)}


def _element(args, data):
    if args.fixture is not None:
        raise InputError(f"{args.command} takes an element, not a channel fixture")
    if isinstance(data, dict) and "element" in data:
        data = data["element"]
    return serialize.element_from_json(data)


def cmd_corner(args, data):
    a = _element(args, data)
    if not a.is_effect():
        raise DomainError("the standard corner needs an effect")
    return {"map": cm.standard_corner(a)}


def cmd_compress(args, data):
    a = _element(args, data)
    if not a.is_effect():
        raise DomainError("the standard compression needs an effect")
    return {"map": cm.standard_compression(a)}


def cmd_wedderburn(args, data):
    if args.fixture is not None:
        raise InputError("wedderburn takes a concrete algebra, not a channel fixture")
    wd = wedderburn(serialize.concrete_from_json(data), seed=args.seed)
    return serialize.wedderburn_to_json(wd)


def cmd_subchannel(args, data):
    phi = _channel(args, data)
    dil = paschke_dilate(phi, seed=args.seed)
    if isinstance(data, dict) and "psi" in data:
        psi = serialize.cpmap_from_json(data["psi"])
        t, residual = purity.t_from_subchannel(dil, psi, return_residual=True)
        return {"t": t, "residual": residual, "P": dil.P, "seed": args.seed}
    if isinstance(data, dict) and "t" in data:
        t = serialize.element_from_json(data["t"], dil.P)
    else:
        t = purity.random_commutant_effect(dil, np.random.default_rng(args.seed))
    return {"t": t, "psi": purity.subchannel_from_t(dil, t), "P": dil.P, "seed": args.seed}


def cmd_mediate(args, data):
    phi = _channel(args, data)
    dil = paschke_dilate(phi, seed=args.seed)
    if isinstance(data, dict) and "rho" in data:
        rho2, f2 = serialize.cpmap_from_json(data["rho"]), serialize.cpmap_from_json(data["f"])
    else:
        # default alternative: the dilation inflated by a seeded density on C^2
        rng = np.random.default_rng(args.seed)
        g = linalg.random_complex((2, 2), rng)
        omega = g @ g.conj().T
        alt = inflate(dil.triple(), 2, omega / np.trace(omega).real)
        rho2, f2 = alt.rho, alt.f
    sigma = mediating_map(dil, rho2, f2)
    sigma2, iso = mediating_map_via_isometry(dil, rho2, f2, return_residual=True)
    return {
        "sigma": sigma,
        "routes_agree": sigma.distance(sigma2),
        "isometry_residual": iso,
        "residuals": mediator_residuals(dil, sigma, rho2, f2),
        "P": dil.P,
        "seed": args.seed,
    }


def cmd_corpus(args, data):
    if args.action == "generate":
        entries = corpus_mod.generate(args.seed, args.size)
        digest = corpus_mod.corpus_hash(entries) if entries else None
        return {"seed": args.seed, "size": args.size, "corpus_hash": digest, "entries": corpus_mod.corpus_json(entries)}
    return corpus_mod.run(args.seed, args.size, inject_fault=args.inject_fault)


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# plumbing ----------------------------------------------------------------------
def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _tol(text):
    v = float(text)
    if not np.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError("tolerance must be a positive finite number")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="paschke", description="Paschke and Stinespring dilations of CP maps.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="seed for randomized internals (default 0)")
    common.add_argument("--tol", type=_tol, default=None, help="base tolerance tau (default 1e-9)")
    common.add_argument("--format", choices=["json"], default="json")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--in", dest="input_path", metavar="PATH", help="read JSON input from PATH ('-' for stdin)")
    src.add_argument("--fixture", metavar="NAME", help=f"use a named channel: {', '.join(sorted(fixtures.FIXTURES))}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "corpus":
            p.add_argument("action", choices=["generate", "run"])
            p.add_argument("--size", type=int, default=50)
            p.add_argument("--inject-fault", action="store_true", help="perturb every f by 1e-3 before verifying")
        else:
            p.add_argument("inline", nargs="?", metavar="JSON", help="inline JSON input")
    return parser


def _emit(stream, payload):
    body = {"schema_version": serialize.SCHEMA_VERSION, **serialize.to_jsonable(payload)}
    stream.write(serialize.dumps(body) + "\n")


def _error(kind, message, details=None):
    err = {"kind": kind, "message": message}
    if details:
        err["details"] = serialize.to_jsonable(details)
    return {"error": err}


def run(argv=None, stdout=None, stderr=None):
    """Parse ``argv``, dispatch, print JSON; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    overrides = {} if args.tol is None else {"tau": args.tol}
    try:
        with settings.tolerances(**overrides):
            data = None if args.command == "corpus" else _read_input(args)
            payload = HANDLERS[args.command](args, data)
    except InputError as exc:
        stderr.write(exc.message + "\n")
        _emit(stdout, _error("input", exc.message, exc.details))
        return EXIT_INPUT
    except StructuralError as exc:
        stderr.write(exc.message + "\n")
        _emit(stdout, {"error": serialize.to_jsonable(exc.to_dict())})
        return EXIT_INPUT
    except DomainError as exc:
        _emit(stdout, {"error": serialize.to_jsonable(exc.to_dict())})
        return EXIT_DOMAIN
    except (NumericalDegeneracyError, VerificationError) as exc:
        _emit(stdout, {"error": serialize.to_jsonable(exc.to_dict())})
        return EXIT_NUMERIC
    except PaschkeError as exc:
        _emit(stdout, {"error": serialize.to_jsonable(exc.to_dict())})
        return EXIT_DOMAIN
    except OSError as exc:
        stderr.write(f"cannot read input: {exc}\n")
        _emit(stdout, _error("input", f"cannot read input: {exc.strerror}"))
        return EXIT_INPUT
    _emit(stdout, payload)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
