"""
Command-line front end: filterbank inspection, one-shot scattering, masking
analysis and the fixed experiments. Every command writes CSV (or JSON) plus a
JSON sidecar holding the fully resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 IO error.
"""

# cli.py

import argparse
import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

import config
from config import ResourceError
from experiments import (default_amp_ratios, default_freq_gaps, run_asymmetry, run_decay, run_heatmap,
                         run_invariance_suite)
from filterbank import WaveletProfile, build_filterbank
from masking import SELECTIONS, TwoToneSpec, analyze_masking
from scattering import NONLINEARITIES, ScatteringConfig, scattering_energies, scattering_forward
from signals import Component, grid_frequencies, synth_mixture

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def positive_float(value: str) -> float:
    number = float(value)
    if not np.isfinite(number) or number <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {value}")
    return number


def int_list(value: str) -> List[int]:
    try:
        return [positive_int(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated positive integers, got '{value}'")


def float_list(value: str) -> List[float]:
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'")


def tone(value: str) -> Component:
    """AMPLITUDE:FREQUENCY[:PHASE]"""
    parts = value.split(':')
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected AMPLITUDE:FREQUENCY[:PHASE], got '{value}'")
    try:
        numbers = [float(part) for part in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in '{value}'")
    return Component(*numbers)


def format_number(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), config.FLOAT_FORMAT)


def json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) if isinstance(v, (float, int, np.number)) else v for v in row])
    logging.info(f"Wrote {path}")


def write_json(path: Path, payload: dict):
    with open(path, 'w', newline='\n', encoding='utf-8') as f:
        json.dump(payload, f, sort_keys=True, indent=2, ensure_ascii=False, default=json_default)
        f.write('\n')
    logging.info(f"Wrote {path}")


def sidecar_path(output: Path) -> Path:
    return output.with_suffix('.json') if output.suffix != '.json' else output.with_name(output.stem + '.config.json')


def profile_from(args) -> WaveletProfile:
    if args.profile == 'shannon':
        return WaveletProfile.shannon()
    return WaveletProfile.gammatone(args.order)


def run_context(args) -> dict:
    return {
        'command': args.command,
        'sample_rate': args.sample_rate,
        'length': args.length,
        'threads': 'not recorded; output is independent of the thread count',
        'determinism': 'no randomness; identical flags give byte-identical files',
    }


def cmd_filterbank_dump(args) -> int:
    grid = grid_frequencies(args.length, args.sample_rate)
    fb = build_filterbank(profile_from(args), args.q, args.octaves, args.f_max, args.t, grid)

    order = np.argsort(grid, kind='stable')
    magnitudes = np.abs(fb.hats)
    header = ['frequency'] + [f"lambda_{format_number(lam)}" for lam in fb.lambdas]
    rows = ([float(grid[k])] + [float(m) for m in magnitudes[:, k]] for k in order)

    output = Path(args.output)
    write_csv(output, header, rows)
    write_json(sidecar_path(output), {'run': run_context(args), 'filterbank': fb.metadata()})
    return EXIT_OK


def cmd_scatter(args) -> int:
    tones = args.tone or []
    x = synth_mixture(tones, args.length, args.sample_rate)
    cfg = ScatteringConfig(profile_from(args), args.q, args.octaves, args.f_max, args.t, args.depth,
                           args.nonlinearity, max_workers=args.threads)
    layers = scattering_forward(x, cfg)
    energies = scattering_energies(layers)

    rows = []
    for layer in layers:
        for path, series in layer.pooled.items():
            rows.append({'depth': layer.depth, 'path': '/'.join(format_number(lam) for lam in path),
                         's_mean': float(np.mean(series))})

    output = Path(args.output)
    payload = {
        'run': run_context(args),
        'signal': [{'amplitude': c.amplitude, 'frequency': c.frequency, 'phase': c.phase} for c in tones],
        'scattering': cfg.describe(),
        'layer_energies': energies,
    }
    if args.format == 'json':
        write_json(output, dict(payload, rows=rows))
    else:
        write_csv(output, ['depth', 'path', 's_mean'], ([r['depth'], r['path'], r['s_mean']] for r in rows))
        write_json(sidecar_path(output), payload)
    return EXIT_OK


def cmd_masking(args) -> int:
    spec = TwoToneSpec(Component(args.a1, args.f1, args.phi1), Component(args.a2, args.f2, args.phi2),
                       args.sample_rate, args.length)
    f_max = args.f1 if args.f_max is None else args.f_max
    cfg = ScatteringConfig(profile_from(args), args.q, args.octaves, f_max, args.t, 2, args.nonlinearity,
                           max_workers=args.threads)
    report = analyze_masking(spec, cfg, args.selection)

    output = Path(args.output)
    payload = {'run': run_context(args), 'config': report.config, 'kappa_mean': report.kappa_mean}
    if args.format == 'json':
        write_json(output, dict(payload, rows=report.rows()))
    else:
        write_csv(output, ['lambda1', 'lambda2', 's2n_mean'],
                  ([r['lambda1'], r['lambda2'], r['s2n_mean']] for r in report.rows()))
        write_json(sidecar_path(output), payload)

    print(format_number(report.kappa_mean))
    return EXIT_OK


def cmd_heatmap(args) -> int:
    grid = run_heatmap(default_amp_ratios(args.cells), default_freq_gaps(args.cells), f1=args.f1, T=args.t,
                       Q=args.q, J=args.octaves, order=args.order, nonlinearity=args.nonlinearity,
                       sample_rate=args.sample_rate, length=args.length, max_workers=args.threads)
    header = ['amp_ratio', 'freq_gap', 'kappa', 'dominant_lambda2', 'snapped_f2']
    output = Path(args.output)
    write_csv(output, header, ([row[key] for key in header] for row in grid.rows()))
    write_json(sidecar_path(output), {'run': run_context(args), 'config': grid.config})
    return EXIT_OK


def cmd_decay(args) -> int:
    curves = run_decay(args.n, args.depth, f1=args.f1, T=args.t, J=args.octaves, a1=args.a1,
                       sample_rate=args.sample_rate, length=args.length, max_workers=args.threads)
    header = ['N', 'depth', 'captured', 'residual']
    output = Path(args.output)
    write_csv(output, header, ([row[key] for key in header] for row in curves.rows()))
    write_json(sidecar_path(output), {'run': run_context(args), 'config': curves.config,
                                      'layer_energies': curves.layer_energies})
    return EXIT_OK


def cmd_asymmetry(args) -> int:
    report = run_asymmetry(args.f1, args.gaps, T=args.t, Q=args.q, J=args.octaves, order=args.order,
                           sample_rate=args.sample_rate, length=args.length, max_workers=args.threads)
    output = Path(args.output)
    write_csv(output, ['freq_gap', 'kappa_below', 'kappa_above', 'index'],
              zip(report.gaps, report.kappa_below, report.kappa_above, report.index))
    write_json(sidecar_path(output), {'run': run_context(args), 'config': report.config})
    return EXIT_OK


def cmd_invariance(args) -> int:
    spec = TwoToneSpec(Component(args.a1, args.f1), Component(args.a2, args.f2), args.sample_rate, args.length)
    thetas = list(np.linspace(0, 2 * np.pi, args.thetas, endpoint=False))
    report = run_invariance_suite(spec, args.ts, args.gammas, thetas, Q=args.q, order=args.order,
                                  max_workers=args.threads)
    write_json(Path(args.output), {
        'run': run_context(args),
        'config': report.config,
        'deviations': report.deviations,
        'passed': report.passed,
        'power_exponent': report.power_exponent,
    })
    failed = [family for family, ok in report.passed.items() if not ok]
    if failed:
        logging.warning(f"Invariance checks failed: {', '.join(failed)}")
    return EXIT_OK


def add_common(parser: argparse.ArgumentParser, output_help: str = "Output file path"):
    parser.add_argument("--output", "-o", required=True, help=output_help)
    parser.add_argument("--sample-rate", type=positive_float, default=config.SAMPLE_RATE,
                        help=f"Sample rate in Hz (default {config.SAMPLE_RATE:g})")
    parser.add_argument("--length", type=positive_int, default=config.SIGNAL_LENGTH,
                        help=f"Samples per signal, a power of two (default {config.SIGNAL_LENGTH})")
    parser.add_argument("--threads", type=positive_int, default=config.MAX_WORKERS,
                        help="Worker threads; results do not depend on it")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")


def add_bank(parser: argparse.ArgumentParser, q: int, octaves: int, f_max: Optional[float] = None,
             profile: bool = True, f_max_flag: bool = True):
    if profile:
        parser.add_argument("--profile", choices=('gammatone', 'shannon'), default='gammatone')
    parser.add_argument("--order", type=positive_int, default=config.GAMMATONE_ORDER, help="Gammatone order")
    parser.add_argument("--q", type=positive_int, default=q, help="Filters per octave")
    parser.add_argument("--octaves", type=positive_int, default=octaves, help="Octaves covered by the bank")
    if f_max_flag:
        parser.add_argument("--f-max", type=positive_float, default=f_max, help="Highest center frequency (Hz)")
    parser.add_argument("--t", type=positive_float, default=config.POOLING_T, help="Pooling scale T (s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Constant-Q wavelet scattering and masking-coefficient experiments.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filterbank-dump", help="Write filter magnitudes on the FFT grid")
    add_common(p)
    add_bank(p, 1, config.DECAY_OCTAVES, config.HEATMAP_F1)
    p.set_defaults(func=cmd_filterbank_dump)

    p = sub.add_parser("scatter", help="Scatter a sum of tones and write mean S per path")
    add_common(p)
    add_bank(p, config.HEATMAP_Q, config.HEATMAP_OCTAVES, config.HEATMAP_F1)
    p.add_argument("--tone", type=tone, action="append", help="AMPLITUDE:FREQUENCY[:PHASE], repeatable")
    p.add_argument("--depth", type=positive_int, default=2)
    p.add_argument("--nonlinearity", choices=NONLINEARITIES, default='power')
    p.add_argument("--format", choices=('csv', 'json'), default='csv')
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("masking", help="Masking coefficient of a two-tone signal; prints kappa_mean")
    add_common(p)
    add_bank(p, config.HEATMAP_Q, config.HEATMAP_OCTAVES)
    for index in (1, 2):
        p.add_argument(f"--a{index}", type=float, default=1.0, help=f"Amplitude of tone {index}")
        p.add_argument(f"--f{index}", type=float, required=True, help=f"Frequency of tone {index} (Hz)")
        p.add_argument(f"--phi{index}", type=float, default=0.0, help=f"Phase of tone {index} (rad)")
    p.add_argument("--nonlinearity", choices=NONLINEARITIES, default='modulus')
    p.add_argument("--selection", choices=SELECTIONS, default='f1',
                   help="Sum over the lambda1 branch nearest f1, or over all paths")
    p.add_argument("--format", choices=('csv', 'json'), default='csv')
    p.set_defaults(func=cmd_masking)

    p = sub.add_parser("heatmap", help="kappa over (amplitude ratio, frequency gap)")
    add_common(p)
    add_bank(p, config.HEATMAP_Q, config.HEATMAP_OCTAVES, profile=False, f_max_flag=False)
    p.add_argument("--f1", type=positive_float, default=config.HEATMAP_F1)
    p.add_argument("--cells", type=positive_int, default=config.HEATMAP_CELLS, help="Cells per axis")
    p.add_argument("--nonlinearity", choices=NONLINEARITIES, default='modulus')
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("decay", help="Scattered energy per depth for N-term Fourier series")
    add_common(p)
    p.add_argument("--n", type=int_list, default=[1, 2, 4, 8], help="Comma-separated component counts")
    p.add_argument("--depth", type=positive_int, default=4)
    p.add_argument("--f1", type=positive_float, default=config.DECAY_F1, help="Fundamental (Hz)")
    p.add_argument("--a1", type=positive_float, default=1.0, help="Amplitude of every harmonic")
    p.add_argument("--octaves", type=positive_int, default=config.DECAY_OCTAVES)
    p.add_argument("--t", type=positive_float, default=config.DECAY_T, help="Pooling scale T (s)")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("asymmetry", help="kappa with f2 mirrored below and above f1")
    add_common(p)
    add_bank(p, config.HEATMAP_Q, config.HEATMAP_OCTAVES, profile=False, f_max_flag=False)
    p.add_argument("--f1", type=positive_float, default=config.HEATMAP_F1)
    p.add_argument("--gaps", type=float_list, default=[0.125, 0.25, 0.5], help="Relative gaps")
    p.set_defaults(func=cmd_asymmetry)

    p = sub.add_parser("invariance", help="Phase, transposition and intensity checks on kappa")
    add_common(p, "Output JSON report path")
    p.add_argument("--order", type=positive_int, default=config.GAMMATONE_ORDER)
    p.add_argument("--q", type=positive_int, default=config.HEATMAP_Q)
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--f1", type=float, default=1024.0, help="Masker frequency; transposition needs headroom above it")
    p.add_argument("--a2", type=float, default=1.0)
    p.add_argument("--f2", type=float, required=True)
    p.add_argument("--ts", type=float_list, default=[config.POOLING_T], help="Comma-separated pooling scales")
    p.add_argument("--gammas", type=float_list, default=[-2.0, -1.0, 0.0, 1.0, 2.0])
    p.add_argument("--thetas", type=positive_int, default=8, help="Phase grid size per tone")
    p.set_defaults(func=cmd_invariance)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return args.func(args)
    except (ValueError, ResourceError) as e:
        logging.error(f"{args.command}: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logging.error(f"{args.command}: cannot write output: {e}")
        return EXIT_IO
