"""Command-line entry point: ``rackkex rack|kex|fq|thompson ...``."""
from __future__ import annotations

import argparse
import base64
import json
import logging
import os
import sys
import threading
import warnings

from . import ext, inn, kex, present, thompson, wire
from .freerack import format_fr, fq_canonical, fq_embed, parse_fr
from .rackcore import RackError, check_rack_axioms, load_rack, rack_from_descriptor
from .words import format_word, parse_word


class CLIError(Exception):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _hostport(text: str):
    host, _, port = text.rpartition(":")
    return (host or "127.0.0.1", int(port) if port else wire.DEFAULT_PORT)


# ---------------------------------------------------------------------------
# rack


def cmd_rack_check(args):
    X = load_rack(args.file)
    print(check_rack_axioms(X.table))


def cmd_rack_inn(args):
    X = load_rack(args.file)
    G = inn.inn_group(X)
    conn = "connected" if inn.is_connected(X) else "not connected"
    sizes = [len(o) for o in inn.orbits(X)]
    print(f"order {G.order()}, {conn}")
    print("orbit sizes: " + " ".join(str(s) for s in sizes))


def cmd_rack_env(args):
    text = _read(args.file)
    if text.lstrip().startswith("<"):
        P = present.env_from_presentation(present.parse_rack_presentation(text))
    else:
        P = present.env_from_table(rack_from_descriptor(json.loads(text)))
    print(present.emit_text(P))


def cmd_rack_present_inn(args):
    X = load_rack(args.file)
    print(present.emit_text(present.present_operator_group(X)))


def cmd_ext_validate(args):
    desc = json.loads(_read(args.file))
    if desc.get("type") != "extension":
        raise CLIError("expected an extension descriptor")
    Y = rack_from_descriptor(desc["base"])
    alpha = ext.CocycleFamily.from_lists(desc["alpha"])
    report = ext.validate_cocycle(Y, alpha)
    print(report)
    return 0 if report.rack_valid else 1


def cmd_ext_reconstruct(args):
    X = load_rack(args.x_file)
    Y = load_rack(args.y_file)
    fmap = json.loads(_read(args.map_file))
    xs, ys = X.elements(), Y.elements()
    if len(fmap) != len(xs):
        raise CLIError(f"map has {len(fmap)} entries, X has {len(xs)} elements")
    f = {x: ys[j] for x, j in zip(xs, fmap)}
    rec = ext.reconstruct_extension(f, X, Y)
    out = {"extension": rec.extension.descriptor(),
           "iso": [[Y.index(y), i, X.index(x)] for (y, i), x in rec.iso.items()]}
    print(json.dumps(out))


# ---------------------------------------------------------------------------
# kex


def _params(path):
    return kex.PublicParams.from_text(_read(path))


def _rng():
    return wire.default_rng()


def cmd_kex_ttp_keygen(args):
    seed = os.urandom(32)
    key = kex.signing_key_from_seed(seed)
    _write(args.seed_out, seed.hex() + "\n")
    _write(args.pub_out, kex.public_key_bytes(key).hex() + "\n")


def cmd_kex_params(args):
    X = load_rack(args.rack)
    gens = [X.check(X.parse(g)) for g in args.gen]
    params = kex.PublicParams(X, gens)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", kex.DegenerateParamsWarning)
        kex.check_params(params, _rng())
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write(args.out, params.to_text())


def cmd_kex_keygen(args):
    params = _params(args.params)
    sk, images = kex.keygen(params, _rng())
    X = params.rack
    _write(args.secret_out, json.dumps({"params_hash": params.params_hash.hex(),
                                        "a": base64.b64encode(X.encode(sk.a)).decode()}) + "\n")
    _write(args.images_out, json.dumps({"images": [base64.b64encode(i).decode() for i in images]}) + "\n")


def _load_images(path):
    return [base64.b64decode(s) for s in json.loads(_read(path))["images"]]


def _load_secret(path, params):
    d = json.loads(_read(path))
    if d["params_hash"] != params.params_hash.hex():
        raise CLIError("secret key was generated for different parameters")
    return kex.SecretKey(params.rack.decode_member(base64.b64decode(d["a"])))


def cmd_cert_issue(args):
    params = _params(args.params)
    key = kex.signing_key_from_seed(bytes.fromhex(_read(args.ttp_seed).strip()))
    cert = kex.issue_cert(key, args.identity, params, _load_images(args.images))
    _write(args.out, cert.to_text())


def cmd_cert_verify(args):
    params = _params(args.params)
    cert = kex.Certificate.from_text(_read(args.cert))
    ok = kex.verify_cert(bytes.fromhex(_read(args.ttp_pub).strip()), cert, params)
    print("certificate ok" if ok else "certificate INVALID")
    return 0 if ok else 1


def cmd_kex_serve(args):
    params = _params(args.params)
    ttp_pub = bytes.fromhex(_read(args.ttp_pub).strip())
    b_policy = "ephemeral"
    if args.static_b:
        b_policy = kex.rack_word_from_dict(json.loads(_read(args.static_b)))
    server = wire.serve_responder(_hostport(args.listen), params, ttp_pub, b_policy, _rng())
    host, port = server.server_address[:2]
    print(f"listening on {host}:{port}", flush=True)
    try:
        if args.once:
            t = threading.Thread(target=server.serve_forever, daemon=True)
            t.start()
            while not server.sessions and not server.failures:
                threading.Event().wait(0.05)
            server.shutdown()
            if server.failures:
                print(f"handshake failed: {server.failures[0]}")
                return 1
            print(f"session key fingerprint {server.sessions[0].fingerprint}")
        else:
            server.serve_forever()
    finally:
        server.server_close()
    return 0


def cmd_kex_connect(args):
    params = _params(args.params)
    sk = _load_secret(args.secret, params)
    cert = kex.Certificate.from_text(_read(args.cert))
    key = wire.run_initiator(_hostport(args.addr), params, sk, cert, _rng())
    print(f"session key fingerprint {kex.fingerprint(key)}")


def cmd_kex_attack(args):
    params = _params(args.params)
    found = kex.brute_force_secret(params, _load_images(args.images))
    X = params.rack
    print(f"consistent secrets: {len(found)}")
    for a in found:
        print(X.format(a))
    if len(found) > 1:
        print("warning: parameters do not determine the secret", file=sys.stderr)


# ---------------------------------------------------------------------------
# fq / thompson


def cmd_fq_canon(args):
    x = fq_canonical(parse_fr(args.element))
    print(format_fr(x))
    if args.embed:
        print(format_word(fq_embed(x)))


def cmd_thompson_nf(args):
    print(thompson.t_from_word(parse_word(args.word)))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rackkex", description="Rack algebra and rack-based key agreement.")
    p.add_argument("-v", "--verbose", action="store_true")
    top = p.add_subparsers(dest="group", required=True)

    rack = top.add_parser("rack", help="finite rack tools").add_subparsers(dest="cmd", required=True)
    for name, fn, hlp in (("check", cmd_rack_check, "axiom report"),
                          ("inn", cmd_rack_inn, "inner automorphism group and connectivity"),
                          ("env", cmd_rack_env, "enveloping group presentation"),
                          ("present-inn", cmd_rack_present_inn, "operator group presentation")):
        s = rack.add_parser(name, help=hlp)
        s.add_argument("file")
        s.set_defaults(func=fn)
    extp = rack.add_parser("ext", help="extensions").add_subparsers(dest="ext_cmd", required=True)
    s = extp.add_parser("validate")
    s.add_argument("file")
    s.set_defaults(func=cmd_ext_validate)
    s = extp.add_parser("reconstruct")
    s.add_argument("x_file")
    s.add_argument("map_file")
    s.add_argument("y_file")
    s.set_defaults(func=cmd_ext_reconstruct)

    k = top.add_parser("kex", help="key agreement").add_subparsers(dest="cmd", required=True)
    s = k.add_parser("ttp-keygen", help="new TTP Ed25519 seed and public key (hex)")
    s.add_argument("seed_out")
    s.add_argument("pub_out")
    s.set_defaults(func=cmd_kex_ttp_keygen)
    s = k.add_parser("params", help="public parameters from a rack file and generators")
    s.add_argument("rack")
    s.add_argument("--gen", action="append", required=True, help="generator in the rack's text form")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_kex_params)
    s = k.add_parser("keygen")
    s.add_argument("params")
    s.add_argument("--secret-out", required=True)
    s.add_argument("--images-out", required=True)
    s.set_defaults(func=cmd_kex_keygen)
    cert = k.add_parser("cert").add_subparsers(dest="cert_cmd", required=True)
    s = cert.add_parser("issue")
    s.add_argument("params")
    s.add_argument("images")
    s.add_argument("--ttp-seed", required=True)
    s.add_argument("--identity", required=True)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_cert_issue)
    s = cert.add_parser("verify")
    s.add_argument("params")
    s.add_argument("cert")
    s.add_argument("--ttp-pub", required=True)
    s.set_defaults(func=cmd_cert_verify)
    s = k.add_parser("serve")
    s.add_argument("params")
    s.add_argument("--ttp-pub", required=True)
    s.add_argument("--listen", default=f"127.0.0.1:{wire.DEFAULT_PORT}")
    s.add_argument("--static-b", help="JSON rack word used for every session")
    s.add_argument("--once", action="store_true", help="exit after one handshake")
    s.set_defaults(func=cmd_kex_serve)
    s = k.add_parser("connect")
    s.add_argument("params")
    s.add_argument("secret")
    s.add_argument("cert")
    s.add_argument("--addr", default=f"127.0.0.1:{wire.DEFAULT_PORT}")
    s.set_defaults(func=cmd_kex_connect)
    s = k.add_parser("attack", help="brute-force the consistency set of a certificate")
    s.add_argument("params")
    s.add_argument("images")
    s.set_defaults(func=cmd_kex_attack)

    fq = top.add_parser("fq", help="free quandle").add_subparsers(dest="cmd", required=True)
    s = fq.add_parser("canon")
    s.add_argument("element", help="e.g. '(a1*a0, a0)'")
    s.add_argument("--embed", action="store_true", help="also print w a w^-1")
    s.set_defaults(func=cmd_fq_canon)

    th = top.add_parser("thompson", help="Thompson's group F").add_subparsers(dest="cmd", required=True)
    s = th.add_parser("nf")
    s.add_argument("word")
    s.set_defaults(func=cmd_thompson_nf)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (CLIError, RackError, kex.KexError, wire.HandshakeError, wire.FrameError,
            present.PresentationSyntaxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
