import json
import sys

from core.errors import ParameterError, UsageError
from core.simulate import HurstPathSpec, NuPathSpec, PathMode, ProcessKind, SimulationSpec, generate, write_path_csv


def build_simulation_spec(args) -> SimulationSpec:
    """Resolve command-line flags into a validated SimulationSpec"""
    kind = ProcessKind(args.process)
    try:
        hpath = nupath = None
        if kind is ProcessKind.MPRE:
            hpath = HurstPathSpec(mode=PathMode(args.hpath), value=args.h)
            nupath = NuPathSpec(value=args.nu)
        return SimulationSpec(
            kind=kind,
            n=args.n,
            seed=args.seed,
            hurst=args.h,
            hurst2=args.h2,
            phi=args.phi,
            hpath=hpath,
            nupath=nupath,
            truncation=args.truncation,
            substeps=args.substeps,
        )
    except ParameterError as e:
        raise UsageError(str(e))


def run_simulate_command(args) -> int:
    """Generate one path and write it as index,time,value CSV"""
    spec = build_simulation_spec(args)
    print(f"config: {json.dumps(spec.describe(), sort_keys=True)}", file=sys.stderr)

    sample = generate(spec)
    if args.output:
        write_path_csv(sample, args.output)
    else:
        write_path_csv(sample, sys.stdout)
    return 0
