"""
Command Line Interface
Loads a JSON document, runs one family of checks and prints a summary.

Exit codes: 0 when a verdict was computed (true or false), 2 on malformed
input, 3 when a certificate or theorem check failed.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd

from src.classifier import is_boolean_topos, is_de_morgan_topos, omega, omega_notnot, stone_report
from src.config import TOOL_VERSION, apply_cli_overrides, config_value
from src.corpus import ALL_CHECKS, CATEGORY_CHECKS, POSET_CHECKS, build_tasks, run_corpus
from src.documents import (
    document_digest,
    load_category,
    load_internal_lattice,
    load_lattice,
    load_site,
    read_document,
)
from src.errors import CheckFailure, InputError, WorkbenchError
from src.fincat import has_amalgamation, has_right_ore, is_cartesian
from src.frames import cross_check_gleason, gleason_locale_direct, idl_plus_plus, space_predicates
from src.gleason import (
    atoms_category,
    check_boolean_transfer,
    check_idl_coproduct_is_omega,
    check_minimality,
    check_rho_regular_iso,
    gleason_cover,
    gleason_is_de_morgan,
    is_equivalence,
)
from src.indcomp import embed_morphism, extract_base_failure, factor_through_base, ind_amalgamate
from src.indlat import (
    check_loc_ideal_equivalence,
    check_pullback_independence,
    existential_topology,
    joins_of_existentials_cover,
    relative_de_morgan,
    surjectivity_verdict,
    validate_internal_locale,
)
from src.lattice import (
    bits,
    check_heyting_identities,
    ideals,
    is_boolean,
    is_regular_frame,
    is_stone,
    lee_property,
    regular_elements,
)
from src.sites import check_topology_axioms

logger = logging.getLogger(__name__)

Outcome = Tuple[Dict[str, Any], Optional[pd.DataFrame]]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check_category(doc: Dict[str, Any], args) -> Outcome:
    C = load_category(doc)
    structure = is_cartesian(C)
    return {
        'objects': list(C.objects),
        'morphisms': C.n_morphisms,
        'verdicts': {
            'cartesian': structure.holds,
            'right_ore': has_right_ore(C).to_dict(),
            'amalgamation': has_amalgamation(C).to_dict(),
        },
    }, None


def cmd_check_site(doc: Dict[str, Any], args) -> Outcome:
    site = load_site(doc)
    C, J = site.category, site.topology
    rows = [
        {'object': obj, 'least_cover': [C.name(f) for f in bits(J.minimal[c])], 'empty_covers': J.empty_covers(c)}
        for c, obj in enumerate(C.objects)
    ]
    return {
        'objects': list(C.objects),
        'topology': J.kind,
        'verdicts': {
            'axioms': check_topology_axioms(J).to_dict(),
            'trivial': J.is_trivial(),
        },
        'covers': rows,
    }, pd.DataFrame(rows)


def cmd_lattice(doc: Dict[str, Any], args) -> Outcome:
    L = load_lattice(doc)
    verdicts: Dict[str, Any] = {
        'heyting_identities': check_heyting_identities(L).to_dict(),
        'stone': is_stone(L).to_dict(),
        'boolean': is_boolean(L),
        'regular_frame': is_regular_frame(L).to_dict(),
        'lee': {str(r): lee_property(L, r).to_dict() for r in (1, 2)},
    }
    body: Dict[str, Any] = {
        'size': L.size,
        'regular_elements': regular_elements(L).size,
        'ideals': ideals(L).size,
        'space': space_predicates(L),
        'verdicts': verdicts,
    }
    if args.gleason:
        body['gleason_locale'] = gleason_locale_direct(L).size
        body['idl_plus_plus'] = idl_plus_plus(L).size
        verdicts['cross_check'] = cross_check_gleason(L)
    return body, None


def cmd_omega(doc: Dict[str, Any], args) -> Outcome:
    site = load_site(doc)
    report = stone_report(site.category, site.topology)
    frame = report.to_frame()
    frame['lee'] = frame['lee'].map(lambda d: ','.join(f"{k}:{'✓' if v else '❌'}" for k, v in sorted(d.items())))
    body = report.to_dict()
    body['objects'] = [{**row, 'lee': {str(k): v for k, v in row['lee'].items()}} for row in report.rows]
    return {'verdicts': {'de_morgan': report.de_morgan, 'all_stone': report.all_stone,
                         'divergent': report.divergent}, 'omega': body}, frame


def cmd_demorgan(doc: Dict[str, Any], args) -> Outcome:
    site = load_site(doc)
    report = is_de_morgan_topos(site.category, site.topology)
    return {'verdicts': {'de_morgan': report.holds}, 'witness': report.witness, 'rows': report.rows}, report.to_frame()


def cmd_boolean(doc: Dict[str, Any], args) -> Outcome:
    site = load_site(doc)
    report = is_boolean_topos(site.category, site.topology)
    return {'verdicts': {'boolean': report.holds}, 'witness': report.witness, 'rows': report.rows}, report.to_frame()


def cmd_ore(doc: Dict[str, Any], args) -> Outcome:
    return {'verdicts': {'right_ore': has_right_ore(load_category(doc)).to_dict()}}, None


def cmd_amalg(doc: Dict[str, Any], args) -> Outcome:
    return {'verdicts': {'amalgamation': has_amalgamation(load_category(doc)).to_dict()}}, None


def cmd_gleason(doc: Dict[str, Any], args) -> Outcome:
    site = load_site(doc)
    C, J = site.category, site.topology
    G = gleason_cover(C, J)
    verdicts = {
        'de_morgan': gleason_is_de_morgan(G).to_dict(),
        'minimal': check_minimality(G).to_dict(),
        'rho_regular_iso': check_rho_regular_iso(G).to_dict(),
        'surjective': surjectivity_verdict(G.omega_nn, G.relative).verdict,
        'idl_coproduct_is_omega': check_idl_coproduct_is_omega(C, J).to_dict(),
        'equivalence': is_equivalence(G),
        'boolean_transfer': check_boolean_transfer(G).to_dict(),
    }
    body: Dict[str, Any] = {'fibre_sizes': G.fibre_sizes(), 'verdicts': verdicts}
    if args.atoms:
        body['atoms'] = atoms_category(C, J).to_dict()
    frame = pd.DataFrame.from_dict(G.fibre_sizes(), orient='index').rename_axis('object').reset_index()
    return body, frame


def cmd_locale(doc: Dict[str, Any], args) -> Outcome:
    """An internal-lattice document, or a site whose Ω and Ω¬¬ are certified"""
    if 'fibres' in doc:
        locales = {doc.get('name') or 'L': validate_internal_locale(
            load_internal_lattice(doc), require_cartesian=not args.any_base)}
    else:
        site = load_site(doc)
        frame = omega(site.category, site.topology)
        locales = {
            'omega': validate_internal_locale(frame, require_cartesian=not args.any_base),
            'omega_nn': validate_internal_locale(
                omega_notnot(site.category, site.topology, frame), require_cartesian=not args.any_base),
        }
    verdicts: Dict[str, Any] = {}
    rows = []
    for name, L in locales.items():
        record = {
            'certificates': dict(L.certificates),
            'pullback_independence': check_pullback_independence(L).to_dict(),
            'existentials_cover': joins_of_existentials_cover(L).to_dict(),
        }
        if L.certificates['cartesian_base']:
            rel = existential_topology(L)
            record['existential_topology'] = rel.certificates.get('cover_lifting', False)
            record['relative_de_morgan'] = relative_de_morgan(L)
        verdicts[name] = record
        rows.append({'locale': name, **L.fibre_sizes()})
    return {'verdicts': verdicts}, pd.DataFrame(rows)


def cmd_loc_ideal(doc: Dict[str, Any], args) -> Outcome:
    if 'fibres' in doc:
        locales = {doc.get('name') or 'L': validate_internal_locale(load_internal_lattice(doc))}
    else:
        site = load_site(doc)
        frame = omega(site.category, site.topology)
        locales = {
            'omega': validate_internal_locale(frame),
            'omega_nn': validate_internal_locale(omega_notnot(site.category, site.topology, frame)),
        }
    verdicts = {}
    for name, L in locales.items():
        report = check_loc_ideal_equivalence(L)
        verdicts[name] = {'holds': report.holds, 'detail': report.detail, 'isomorphisms': report.isomorphisms}
    return {'verdicts': verdicts}, None


def cmd_ind_amalg(doc: Dict[str, Any], args) -> Outcome:
    C = load_category(doc)
    f, g = (C.morphism_id(name) for name in args.span)
    if C.morphisms[f].dom != C.morphisms[g].dom:
        raise InputError(f"{args.span[0]} and {args.span[1]} do not form a span", {'span': list(args.span)})
    result = ind_amalgamate(embed_morphism(C, f), embed_morphism(C, g), bound=args.bound)
    body: Dict[str, Any] = {'verdicts': {'amalgamated': result.found}, 'search': result.to_dict()}
    if result.found:
        h, k = factor_through_base(f, g, result)
        body['base_amalgamation'] = [C.name(h), C.name(k)]
    else:
        body['base_failure'] = extract_base_failure(C, f, g).to_dict()
    return body, None


def cmd_corpus(args) -> Outcome:
    checks = list(ALL_CHECKS) if 'all' in args.check else list(dict.fromkeys(args.check))
    tasks = build_tasks(checks, args.max_objects, args.max_morphisms, args.max_elements)
    print(f"Tasks: {len(tasks)} | Workers: {config_value('workers')}")
    result = run_corpus(tasks)
    frame = result.to_frame()
    if args.csv:
        frame.to_csv(args.csv, index=False)
        print(f"✓ Rows written to {args.csv}")
    summary = result.summary()
    body = {
        'bounds': {
            'max_objects': args.max_objects,
            'max_morphisms': args.max_morphisms,
            'max_elements': args.max_elements,
        },
        'checks': checks,
        'summary': summary.to_dict(orient='records'),
        'failures': [{k: v for k, v in row.items() if k != 'seconds'} for row in result.failures],
        'verdicts': result.verdicts(),
    }
    body['mismatches'] = len(body['failures'])
    return body, summary


COMMANDS: Dict[str, Callable[[Dict[str, Any], Any], Outcome]] = {
    'check-category': cmd_check_category,
    'check-site': cmd_check_site,
    'lattice': cmd_lattice,
    'omega': cmd_omega,
    'demorgan': cmd_demorgan,
    'boolean': cmd_boolean,
    'ore': cmd_ore,
    'amalg': cmd_amalg,
    'gleason': cmd_gleason,
    'locale': cmd_locale,
    'loc-ideal': cmd_loc_ideal,
    'ind-amalg': cmd_ind_amalg,
}


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def build_report(command: str, digest: Optional[str], body: Dict[str, Any], timings: Dict[str, float]) -> Dict[str, Any]:
    """`body` is deterministic for identical input; timings are kept apart"""
    return {
        'body': {
            'tool_version': TOOL_VERSION,
            'command': command,
            'input_digest': digest,
            **body,
        },
        'timings': timings,
    }


def write_report(report: Dict[str, Any], path: str) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n",
        encoding='utf-8',
    )


def _mark(value: Any) -> str:
    if isinstance(value, dict):
        value = value.get('holds', value)
    if isinstance(value, bool):
        return '✓ true' if value else '❌ false'
    return str(value)


def print_summary(command: str, report: Dict[str, Any], table: Optional[pd.DataFrame]) -> None:
    body = report['body']
    print("\n" + "=" * 72)
    print(f"Workbench - {command}")
    print("=" * 72)
    if body.get('input_digest'):
        print(f"Input digest: {body['input_digest'][:16]}")
    for name, value in (body.get('verdicts') or {}).items():
        if command == 'corpus':
            break
        if isinstance(value, dict) and 'holds' not in value:
            for sub, inner in value.items():
                print(f"{name}.{sub}: {_mark(inner)}")
            continue
        print(f"{name}: {_mark(value)}")
    if body.get('witness'):
        print(f"Witness: {json.dumps(body['witness'], ensure_ascii=False, default=str)}")
    if table is not None and not table.empty:
        print("-" * 72)
        print(table.to_string(index=False))
    if command == 'corpus':
        print("-" * 72)
        mismatches = body['mismatches']
        print(f"{'✓' if mismatches == 0 else '❌'} Mismatches: {mismatches}")
    print("=" * 72)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def parse_args(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser(description="Finite-site topos and lattice workbench")
    parser.add_argument("--report", help="Write the JSON report to this path")
    parser.add_argument("--seed", type=int, default=None, help="Reserved; all computation is deterministic")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--max-lattice-size", type=int, help="Override WORKBENCH_MAX_LATTICE_SIZE")
    parser.add_argument("--max-sieves", type=int, help="Override WORKBENCH_MAX_SIEVES")
    parser.add_argument("--workers", type=int, help="Override WORKBENCH_WORKERS")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ('check-category', "Validate a category and report cartesian / Ore / amalgamation"),
        ('check-site', "Validate a site and its topology axioms"),
        ('lattice', "Heyting, Stone, Boolean and space checks on a lattice or space"),
        ('omega', "Subobject classifier fibres with the Stone report"),
        ('demorgan', "Decide whether Sh(C, J) is De Morgan"),
        ('boolean', "Decide whether Sh(C, J) is Boolean"),
        ('ore', "Right Ore condition"),
        ('amalg', "Amalgamation property"),
        ('gleason', "Gleason cover and its checks"),
        ('locale', "Internal-locale certificates"),
        ('loc-ideal', "Compare fibred and pointwise ideal completions"),
        ('ind-amalg', "Bounded amalgamation of an embedded span in the ind-completion"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="JSON document")
        if name == 'lattice':
            p.add_argument("--gleason", action="store_true", help="Also compute Idl⁺(L¬¬) and cross-check")
        if name == 'gleason':
            p.add_argument("--atoms", action="store_true", help="Also build the atoms category (presheaf sites)")
        if name == 'locale':
            p.add_argument("--any-base", action="store_true", help="Allow non-cartesian bases")
        if name == 'ind-amalg':
            p.add_argument("--span", nargs=2, metavar=("F", "G"), required=True, help="Morphism ids of the span")
            p.add_argument("--bound", type=int, default=None, help="Largest index size searched")

    corpus = sub.add_parser('corpus', help="Run property checks over the enumeration corpus")
    corpus.add_argument("--max-objects", type=int, default=3)
    corpus.add_argument("--max-morphisms", type=int, default=8)
    corpus.add_argument("--max-elements", type=int, default=5, help="Largest poset for lattice checks")
    corpus.add_argument(
        "--check", nargs='+', default=['ore-vs-demorgan'],
        choices=list(ALL_CHECKS) + ['all'],
        help=f"Category checks: {', '.join(CATEGORY_CHECKS)}; lattice checks: {', '.join(POSET_CHECKS)}",
    )
    corpus.add_argument("--csv", help="Write the row table as CSV")
    return parser.parse_args(argv)


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, str(config_value('log_level')).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def run(args) -> int:
    started = time.perf_counter()
    try:
        if args.command == 'corpus':
            digest = document_digest({
                'checks': sorted(args.check),
                'bounds': [args.max_objects, args.max_morphisms, args.max_elements],
            })
            body, table = cmd_corpus(args)
        else:
            doc = read_document(args.input)
            digest = document_digest(doc)
            body, table = COMMANDS[args.command](doc, args)
    except WorkbenchError as exc:
        kind = "Input error" if isinstance(exc, InputError) else "Check failed"
        print(f"❌ {kind}: {exc}", file=sys.stderr)
        if exc.witness:
            print(f"   witness: {json.dumps(exc.to_dict()['witness'], ensure_ascii=False)}", file=sys.stderr)
        if args.report:
            report = build_report(args.command, None, {'error': exc.to_dict()},
                                  {'total_seconds': round(time.perf_counter() - started, 4)})
            write_report(report, args.report)
        return exc.exit_code

    report = build_report(args.command, digest, body, {'total_seconds': round(time.perf_counter() - started, 4)})
    print_summary(args.command, report, table)
    if args.report:
        write_report(report, args.report)
        print(f"✓ Report written to {args.report}")
    if args.command == 'corpus' and body['mismatches']:
        return CheckFailure.exit_code
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    apply_cli_overrides(args)
    configure_logging()
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
