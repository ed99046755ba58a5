"""Command-line entry point: extract, mine, query, model, plan, repl.

Every subcommand prints deterministic output (no timestamps, key-sorted
JSON) so identical inputs always produce byte-identical results.  Exit
codes: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import shlex
import sys
from pathlib import Path

from . import __version__
from ._util import pretty_json
from .concerns import (
    MODEL_SCHEMA_VERSION,
    ConcernModelError,
    Group,
    Instance,
    add_group,
    add_instance,
    iter_instances,
    load_model,
    remove,
    rename,
    run_all,
    save_model,
)
from .minilang import extract_facts, parse
from .mining import MiningConfig, fan_in_analysis, find_redirectors, grouped_calls_analysis
from .model import SCHEMA_VERSION, DispatchPolicy, FactError, SourceModel, load_facts_path
from .queries import (
    QueryBinding,
    SortKind,
    execute_binding,
    expand_seed,
    query_cb,
    query_ec,
    query_ep,
    query_rl,
    query_rsi,
    query_sc,
)
from .refactoring import (
    AspectSyntaxError,
    PlanError,
    check_precedence,
    combine_plans,
    plan_for,
)

_POLICY_ENV = "SORTWEAVER_POLICY"


class CliError(Exception):
    """User-level failure; message goes to stderr, exit code 1."""


def main(argv: list[str] | None = None, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    argv = list(sys.argv[1:]) if argv is None else list(argv)

    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        args.run(args, stdin, stdout)
        return 0
    except (CliError, FactError, ConcernModelError, PlanError, AspectSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sortweaver",
        description="Mine, document and plan the migration of crosscutting concerns.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=(
            f"sortweaver {__version__} "
            f"(facts schema {SCHEMA_VERSION}, concern-model schema {MODEL_SCHEMA_VERSION})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="parse MiniLang sources and emit facts.jsonl")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.set_defaults(run=cmd_extract)

    p = sub.add_parser("mine", help="run a mining technique over a fact file")
    p.add_argument("technique", choices=["fanin", "grouped", "redirect"])
    p.add_argument("facts")
    p.add_argument("--threshold", type=int, default=None,
                   help="fan-in threshold / minimum callers / minimum redirecting methods")
    p.add_argument("--min-group", type=int, default=None, help="minimum callee group size")
    p.add_argument("--coverage", type=float, default=None, help="redirecting coverage ratio")
    p.add_argument("--utility", action="append", default=[],
                   help="name pattern to exclude (repeatable)")
    p.add_argument("--no-accessor-filter", action="store_true")
    p.add_argument("--policy", choices=[pol.value for pol in DispatchPolicy], default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true")
    group.add_argument("--text", action="store_true")
    p.set_defaults(run=cmd_mine)

    p = sub.add_parser("query", help="execute one sort query")
    p.add_argument("sort", choices=[s.value.lower() for s in SortKind])
    p.add_argument("facts")
    p.add_argument("--target", help="CB: qualified target method")
    p.add_argument("--scope", default="*", help="type, qualified-name prefix ending in '.', or *")
    p.add_argument("--redirector", help="RL: redirector type")
    p.add_argument("--receiver", help="RL: receiver type")
    p.add_argument("--context", help="EC: context type name")
    p.add_argument("--role", help="RSI/SC: role type")
    p.add_argument("--exception", help="EP: exception type name")
    p.add_argument("--root", help="EP: restrict to chains containing this method")
    p.add_argument("--policy", choices=[pol.value for pol in DispatchPolicy], default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_query)

    p = sub.add_parser("model", help="edit or run a concern model")
    msub = p.add_subparsers(dest="model_command", required=True)

    m = msub.add_parser("init", help="create an empty concern model")
    m.add_argument("model_file")
    m.add_argument("--name", default="concerns")
    m.set_defaults(run=cmd_model_init)

    m = msub.add_parser("add-group")
    m.add_argument("model_file")
    m.add_argument("path", help="slash-separated path of the new group")
    m.set_defaults(run=cmd_model_add_group)

    m = msub.add_parser("add-instance")
    m.add_argument("model_file")
    m.add_argument("path")
    m.add_argument("--sort", required=True, choices=[s.value for s in SortKind])
    m.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    m.add_argument("--note", default="")
    m.set_defaults(run=cmd_model_add_instance)

    m = msub.add_parser("remove")
    m.add_argument("model_file")
    m.add_argument("path")
    m.set_defaults(run=cmd_model_remove)

    m = msub.add_parser("rename")
    m.add_argument("model_file")
    m.add_argument("path")
    m.add_argument("new_name")
    m.set_defaults(run=cmd_model_rename)

    m = msub.add_parser("run", help="re-execute every instance and report drift")
    m.add_argument("model_file")
    m.add_argument("facts")
    m.add_argument("--commit", action="store_true", help="store fresh snapshots")
    m.add_argument("--policy", choices=[pol.value for pol in DispatchPolicy], default=None)
    m.add_argument("--json", action="store_true")
    m.set_defaults(run=cmd_model_run)

    p = sub.add_parser("plan", help="generate the aspect plan for an instance or group")
    p.add_argument("model_file")
    p.add_argument("instance_path")
    p.add_argument("facts")
    p.add_argument("--advice", choices=["before", "after", "around"], default=None)
    p.add_argument("--enumerate", dest="enumerate_callers", action="store_true",
                   help="enumerate callers instead of a generic pointcut")
    p.add_argument("--name", default=None, help="aspect name override")
    p.add_argument("-o", "--output", default=None, help="write the aspect text here")
    p.add_argument("--edits", default=None, help="write the edit list (JSON) here")
    p.add_argument("--policy", choices=[pol.value for pol in DispatchPolicy], default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_plan)

    p = sub.add_parser("repl", help="interactive exploration over a fact file")
    p.add_argument("facts")
    p.add_argument("--policy", choices=[pol.value for pol in DispatchPolicy], default=None)
    p.set_defaults(run=cmd_repl)

    return parser


def _policy(args) -> DispatchPolicy:
    chosen = getattr(args, "policy", None) or os.environ.get(_POLICY_ENV)
    if chosen is None:
        return DispatchPolicy.LIFT_TO_ANCESTORS
    try:
        return DispatchPolicy(chosen)
    except ValueError:
        raise CliError(f"unknown dispatch policy {chosen!r}") from None


def _load_model(args) -> SourceModel:
    return load_facts_path(args.facts, policy=_policy(args))


# -- extract ---------------------------------------------------------------------


def cmd_extract(args, stdin, stdout):
    units = []
    for path in args.files:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise CliError(f"{path}: not valid UTF-8 ({exc.reason})") from None
        result = parse(text, source=Path(path).name)
        if not result.ok:
            for diag in result.diagnostics:
                print(f"{path}: {diag}", file=sys.stderr)
            raise CliError(f"{path}: parse failed")
        units.append(result.unit)
    extraction = extract_facts(units)
    for warning in extraction.warnings:
        print(f"warning: {warning.pos}: {warning.message}", file=sys.stderr)
    payload = extraction.to_jsonl()
    if args.output:
        Path(args.output).write_text(payload, encoding="utf-8")
    else:
        stdout.write(payload)


# -- mine ------------------------------------------------------------------------


def cmd_mine(args, stdin, stdout):
    model = _load_model(args)
    config_kwargs = {}
    if args.no_accessor_filter:
        config_kwargs["accessor_filter"] = False
    if args.utility:
        config_kwargs["utility_names"] = tuple(args.utility)
    if args.min_group is not None:
        config_kwargs["grouped_min_group"] = args.min_group
    if args.coverage is not None:
        config_kwargs["redirect_coverage"] = args.coverage
    if args.threshold is not None:
        key = {
            "fanin": "fanin_threshold",
            "grouped": "grouped_min_callers",
            "redirect": "redirect_min_methods",
        }[args.technique]
        config_kwargs[key] = args.threshold
    try:
        config = MiningConfig(**config_kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from None

    technique = {
        "fanin": fan_in_analysis,
        "grouped": grouped_calls_analysis,
        "redirect": find_redirectors,
    }[args.technique]
    if args.technique == "redirect":
        seeds = technique(model, config)
    else:
        seeds = technique(model, config, model.policy)

    if args.json:
        stdout.write(pretty_json([s.to_json() for s in seeds]) + "\n")
        return
    if not seeds:
        stdout.write("no seeds\n")
        return
    for rank, seed in enumerate(seeds, start=1):
        subject = _seed_subject(model, seed)
        stdout.write(f"{rank:>3}  {seed.score:>8g}  {seed.sort_hint}  {subject}\n")


def _seed_subject(model: SourceModel, seed) -> str:
    if seed.technique == "fanin":
        return seed.evidence["method_sig"]
    if seed.technique == "grouped":
        return "{" + ", ".join(seed.evidence["group_sigs"]) + "}"
    return f"{seed.evidence['redirector_name']} -> {seed.evidence['receiver_type_name']}"


# -- query -----------------------------------------------------------------------


def _require(args, flag: str):
    value = getattr(args, flag)
    if value is None:
        raise CliError(f"--{flag} is required for this sort")
    return value


def cmd_query(args, stdin, stdout):
    model = _load_model(args)
    sort = args.sort.lower()
    if sort == "cb":
        result = query_cb(model, _require(args, "target"), args.scope)
    elif sort == "rl":
        result = query_rl(model, _require(args, "redirector"), _require(args, "receiver"))
    elif sort == "ec":
        result = query_ec(model, _require(args, "context"), args.scope)
    elif sort == "rsi":
        result = query_rsi(model, _require(args, "role"), args.scope)
    elif sort == "sc":
        result = query_sc(model, args.scope, args.role)
    else:
        result = query_ep(model, _require(args, "exception"), args.root)

    if args.json:
        stdout.write(pretty_json(result.to_json(model)) + "\n")
        return
    stdout.write(f"{len(result.hits)} hits\n")
    for hit in result.hits:
        stdout.write(f"  {hit.key(model)}\n")


# -- model -----------------------------------------------------------------------


def cmd_model_init(args, stdin, stdout):
    path = Path(args.model_file)
    if path.exists():
        raise CliError(f"{path} already exists")
    save_model(Group(args.name), path)
    stdout.write(f"created {path}\n")


def _edit_model(args, editor):
    root = load_model(args.model_file)
    editor(root)
    save_model(root, args.model_file)


def cmd_model_add_group(args, stdin, stdout):
    _edit_model(args, lambda root: add_group(root, args.path))
    stdout.write(f"added group {args.path}\n")


def cmd_model_add_instance(args, stdin, stdout):
    params = {}
    for item in args.param:
        if "=" not in item:
            raise CliError(f"bad --param {item!r}; expected KEY=VALUE")
        key, value = item.split("=", 1)
        params[key] = value
    binding = QueryBinding.make(SortKind(args.sort), **params)
    _edit_model(args, lambda root: add_instance(root, args.path, binding, args.note))
    stdout.write(f"added instance {args.path}\n")


def cmd_model_remove(args, stdin, stdout):
    _edit_model(args, lambda root: remove(root, args.path))
    stdout.write(f"removed {args.path}\n")


def cmd_model_rename(args, stdin, stdout):
    _edit_model(args, lambda root: rename(root, args.path, args.new_name))
    stdout.write(f"renamed {args.path} to {args.new_name}\n")


def cmd_model_run(args, stdin, stdout):
    root = load_model(args.model_file)
    model = _load_model(args)
    runs = run_all(root, model, commit=args.commit)
    if args.json:
        stdout.write(pretty_json([r.to_json(model) for r in runs]) + "\n")
    else:
        for run in runs:
            if run.error is not None:
                stdout.write(f"{run.path}: error: {run.error}\n")
                continue
            drift = run.drift
            stdout.write(
                f"{run.path}: {len(run.result.hits)} hits "
                f"(+{len(drift.added)} -{len(drift.removed)} ={drift.unchanged})\n"
            )
    if args.commit:
        save_model(root, args.model_file)


# -- plan ------------------------------------------------------------------------


def _find_node(root: Group, path: str):
    node = root
    for part in [p for p in path.split("/") if p]:
        if not isinstance(node, Group):
            raise CliError(f"no such concern path: {path!r}")
        node = node.child(part)
        if node is None:
            raise CliError(f"no such concern path: {path!r}")
    return node


def _aspect_name_from(path: str) -> str:
    tail = [p for p in path.split("/") if p][-1]
    return "".join(ch for ch in tail.title() if ch.isalnum()) if " " in tail else \
        "".join(ch for ch in tail if ch.isalnum())


def cmd_plan(args, stdin, stdout):
    root = load_model(args.model_file)
    node = _find_node(root, args.instance_path)
    model = _load_model(args)

    if isinstance(node, Instance):
        result = execute_binding(model, node.binding)
        plan = plan_for(
            model,
            result,
            advice=args.advice or node.binding.param("advice"),
            enumerate_callers=args.enumerate_callers,
            aspect_name=args.name,
            instance_path=args.instance_path,
        )
    else:
        plans = []
        for sub_path, instance in iter_instances(node, args.instance_path):
            result = execute_binding(model, instance.binding)
            plans.append(
                plan_for(
                    model,
                    result,
                    advice=args.advice or instance.binding.param("advice"),
                    enumerate_callers=args.enumerate_callers,
                    instance_path=sub_path,
                )
            )
        if not plans:
            raise CliError(f"group {args.instance_path!r} contains no instances")
        name = args.name or _aspect_name_from(args.instance_path)
        plan = combine_plans(name, plans, instance_path=args.instance_path)
        interference = check_precedence(plans)
        if interference:
            plan = dataclasses.replace(
                plan, warnings=tuple(list(plan.warnings) + interference)
            )

    text = plan.aspect_text
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    if args.edits:
        Path(args.edits).write_text(
            pretty_json([e.to_json() for e in plan.edits]) + "\n", encoding="utf-8"
        )
    if args.json:
        stdout.write(pretty_json(plan.to_json()) + "\n")
        return
    if not args.output:
        stdout.write(text)
    for warning in plan.warnings:
        stdout.write(
            f"{warning.severity.upper()} {warning.code}: {warning.message}"
            + (f" [{', '.join(warning.evidence)}]" if warning.evidence else "")
            + "\n"
        )
    for note in plan.notes:
        stdout.write(f"note: {note}\n")


# -- repl ------------------------------------------------------------------------

class SessionState:
    """REPL session: loaded facts, mined seeds, last result, history.

    Exploration commands never mutate facts; only ``model`` subcommands
    write files.
    """

    def __init__(self, facts_path: str, model: SourceModel):
        self.facts_path = facts_path
        self.model = model
        self.seeds: list = []
        self.last_result = None
        self.history: list[str] = []


_REPL_HELP = """\
commands:
  callers <method>            distinct callers of a method
  ancestors <type>            supertypes of a type
  members <type>              declared methods and fields
  mine fanin|grouped|redirect run a mining technique; seeds become S1, S2, ...
  seedexpand <seed-id>        suggest query bindings for a mined seed
  cb <target> [scope]         consistent-behavior query
  rl <redirector> <receiver>  redirection-layer query
  ec <context> [scope]        expose-context query
  rsi <role> [scope]          role-superimposition query
  sc <scope> [role]           support-class query
  ep <exception> [root]       exception-propagation query
  help                        this text
  quit                        leave
"""


def cmd_repl(args, stdin, stdout):
    session = SessionState(args.facts, _load_model(args))
    model = session.model
    stdout.write(f"loaded {args.facts}: {len(model.types)} types, "
                 f"{len(model.methods)} methods, {len(model.calls)} calls\n")
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    while True:
        if interactive:
            stdout.write("sortweaver> ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        try:
            words = shlex.split(line.strip())
        except ValueError as exc:
            stdout.write(f"error: {exc}\n")
            continue
        if not words:
            continue
        session.history.append(line.strip())
        command, rest = words[0], words[1:]
        if command in ("quit", "exit"):
            break
        try:
            _repl_dispatch(session, command, rest, stdout)
        except (CliError, FactError, ValueError) as exc:
            stdout.write(f"error: {exc}\n")
    return


def _repl_dispatch(session: SessionState, command: str, rest: list[str], stdout):
    model = session.model
    if command == "help":
        stdout.write(_REPL_HELP)
        return
    if command == "callers":
        if len(rest) != 1:
            raise CliError("usage: callers <method>")
        method = model.resolve_method(rest[0])
        names = sorted(model.method_sig(c) for c in model.callers_of(method.id))
        stdout.write(f"{len(names)} callers of {model.method_sig(method.id)}\n")
        for name in names:
            stdout.write(f"  {name}\n")
        return
    if command == "ancestors":
        if len(rest) != 1:
            raise CliError("usage: ancestors <type>")
        decl = model.require_type(rest[0])
        names = sorted(
            model.types[t].qualified_name
            for t in model.ancestors(decl.id)
            if t != decl.id
        )
        for name in names:
            stdout.write(f"  {name}\n")
        stdout.write(f"{len(names)} ancestors\n")
        return
    if command == "members":
        if len(rest) != 1:
            raise CliError("usage: members <type>")
        decl = model.require_type(rest[0])
        for method in model.methods_of(decl.id):
            stdout.write(f"  method {model.method_sig(method.id)}\n")
        for fld in model.fields_of(decl.id):
            stdout.write(f"  field {fld.declared_type} {fld.name}\n")
        return
    if command == "mine":
        if len(rest) != 1 or rest[0] not in ("fanin", "grouped", "redirect"):
            raise CliError("usage: mine fanin|grouped|redirect")
        technique = {
            "fanin": fan_in_analysis,
            "grouped": grouped_calls_analysis,
            "redirect": find_redirectors,
        }[rest[0]]
        session.seeds = technique(model, MiningConfig())
        for index, seed in enumerate(session.seeds, start=1):
            stdout.write(f"  S{index}  {seed.score:g}  {_seed_subject(model, seed)}\n")
        if not session.seeds:
            stdout.write("no seeds\n")
        return
    if command == "seedexpand":
        if len(rest) != 1 or not rest[0].startswith("S") or not rest[0][1:].isdigit():
            raise CliError("usage: seedexpand S<n>")
        index = int(rest[0][1:]) - 1
        if not 0 <= index < len(session.seeds):
            raise CliError(f"no such seed {rest[0]}; run mine first")
        for suggestion in expand_seed(model, session.seeds[index]):
            binding = suggestion.binding
            stdout.write(
                f"  {binding.sort.value} {dict(binding.params)} "
                f"coverage {suggestion.covered}/{suggestion.total}\n"
            )
        return
    if command in ("cb", "rl", "ec", "rsi", "sc", "ep"):
        result = _repl_query(model, command, rest)
        session.last_result = result
        stdout.write(f"{len(result.hits)} hits\n")
        for hit in result.hits:
            stdout.write(f"  {hit.key(model)}\n")
        return
    raise CliError(f"unknown command {command!r}; try help")


def _repl_query(model, command, rest):
    if command == "cb":
        if not 1 <= len(rest) <= 2:
            raise CliError("usage: cb <target> [scope]")
        return query_cb(model, rest[0], rest[1] if len(rest) > 1 else "*")
    if command == "rl":
        if len(rest) != 2:
            raise CliError("usage: rl <redirector> <receiver>")
        return query_rl(model, rest[0], rest[1])
    if command == "ec":
        if not 1 <= len(rest) <= 2:
            raise CliError("usage: ec <context> [scope]")
        return query_ec(model, rest[0], rest[1] if len(rest) > 1 else "*")
    if command == "rsi":
        if not 1 <= len(rest) <= 2:
            raise CliError("usage: rsi <role> [scope]")
        return query_rsi(model, rest[0], rest[1] if len(rest) > 1 else "*")
    if command == "sc":
        if not 1 <= len(rest) <= 2:
            raise CliError("usage: sc <scope> [role]")
        return query_sc(model, rest[0], rest[1] if len(rest) > 1 else None)
    if len(rest) not in (1, 2):
        raise CliError("usage: ep <exception> [root]")
    return query_ep(model, rest[0], rest[1] if len(rest) > 1 else None)
