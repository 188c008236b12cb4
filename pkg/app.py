"""
Command-line entry point

    python app.py embed --config run.json [--seed N] [--threads N] [--out DIR]
    python app.py eval --embedding out/embedding.json --graph out/graph.json --metrics map,ad [--out DIR]
    python app.py simulate --config run.json [--seed N] [--threads N] [--out DIR]
    python app.py geodesic-check [--pairs N] [--segments N] [--seed N] [--threads N] [--out DIR]

Exit codes: 0 ok, 1 configuration error, 2 data or runtime error.
"""
import argparse
import sys
from typing import List, Optional

from actions.EmbedAction import EmbedAction
from actions.EvalAction import EvalAction
from actions.GeodesicCheckAction import GeodesicCheckAction
from actions.SimulateAction import SimulateAction
from config.RunConfig import RunConfig, applyOverrides, loadRunConfig
from logs.logger import attachRunLog, detachRunLog, get_logger
from utils.constants import GEODESIC_SEGMENTS
from utils.exceptions import ConfigError

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

DEFAULT_OUTPUT_DIR = "output"


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ConfigError so they map to exit code 1"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _addCommonFlags(parser: argparse.ArgumentParser, configRequired: bool) -> None:
    parser.add_argument('--config', required=configRequired, help="Run configuration JSON file")
    parser.add_argument('--seed', type=int, help="Override the configured seed")
    parser.add_argument('--threads', type=int, help="Worker threads (outputs do not depend on it)")
    parser.add_argument('--out', help="Output directory (overrides output_dir)")


def buildParser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog='softmanifold', description="Soft-manifold graph embedding")
    commands = parser.add_subparsers(dest='command', parser_class=_ArgumentParser)
    commands.required = True

    _addCommonFlags(commands.add_parser('embed', help="Embed the configured dataset"), True)

    evalParser = commands.add_parser('eval', help="Score a saved embedding")
    _addCommonFlags(evalParser, False)
    evalParser.add_argument('--embedding', required=True, help="embedding.json path")
    evalParser.add_argument('--graph', required=True, help="graph.json path")
    evalParser.add_argument('--metrics', default='map,ad', help="Comma-separated subset of map,ad")

    _addCommonFlags(commands.add_parser('simulate', help="Run the missing-data experiment grid"), True)

    geodesicParser = commands.add_parser('geodesic-check', help="Calibrate the semimetric against geodesics")
    _addCommonFlags(geodesicParser, False)
    geodesicParser.add_argument('--pairs', type=int, default=200, help="Random interior pairs")
    geodesicParser.add_argument('--segments', type=int, default=GEODESIC_SEGMENTS, help="Polyline segments")
    return parser


def _loadConfig(args: argparse.Namespace) -> Optional[RunConfig]:
    if not args.config:
        return None
    return applyOverrides(loadRunConfig(args.config), seed=args.seed, threads=args.threads, outputDir=args.out)


def _outputDir(args: argparse.Namespace, config: Optional[RunConfig]) -> str:
    if args.out:
        return args.out
    return config.output_dir if config is not None else DEFAULT_OUTPUT_DIR


def _validateFlags(args: argparse.Namespace) -> None:
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be non-negative")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be at least 1")


def _buildAction(args: argparse.Namespace, config: Optional[RunConfig], outputDir: str):
    if args.command == 'embed':
        return EmbedAction(config)
    if args.command == 'simulate':
        return SimulateAction(config)
    if args.command == 'eval':
        metrics = [name.strip() for name in args.metrics.split(',') if name.strip()]
        return EvalAction(args.embedding, args.graph, metrics, outputDir)

    seed = args.seed if args.seed is not None else (config.embed.seed if config is not None else 0)
    threads = args.threads if args.threads is not None else (config.threads if config is not None else 1)
    return GeodesicCheckAction(args.pairs, seed, outputDir, nSegments=args.segments, threads=threads)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and map failures to exit codes

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        int: Process exit code
    """
    try:
        args = buildParser().parse_args(argv)
        _validateFlags(args)
        config = _loadConfig(args)
        outputDir = _outputDir(args, config)
        action = _buildAction(args, config, outputDir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        attachRunLog(outputDir)
        logger.info(f"Running '{args.command}' into {outputDir}")
        result = action.execute()
        if args.command == 'geodesic-check':
            with open(result['summary'], 'r', encoding='utf-8') as stream:
                print(stream.read().strip())
        return EXIT_OK
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as e:
        logger.error(f"'{args.command}' failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    finally:
        detachRunLog()


if __name__ == '__main__':
    sys.exit(main())
