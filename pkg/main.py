import argparse
import logging
import os
import signal
import sys
import threading
from typing import List, Optional

from lib.config_module import display_config, parse_config
from lib.core import ConfigParseError, DivergedTraining, InImNetError, UnknownExperiment, UnknownSuite
from lib.display import Display
from lib.experiments import EXPERIMENTS, build_task, run_experiment, run_task
from lib.logger import setup_logger, set_log_level_by_name
from lib.recorder import Recorder
from lib.verify import SUITES, run_suite

logger = logging.getLogger("InImNet")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


# === Parse command line arguments ===
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='inimnet',
        description='Invariant imbedding networks - verify suites, training and experiments',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''\nExamples:
  python3 main.py verify theorem1                  # Run one property suite
  python3 main.py verify gradients --tol 1e-4      # Override the scalable tolerances
  python3 main.py train -c config/projectile.yaml  # Train from a config file
  python3 main.py experiment rotvec --seed 1       # Run a built-in experiment
    '''
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--log-level',
        type=str,
        default='INFO',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Logging level (default: INFO)'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    verify = sub.add_parser('verify', parents=[common], help='Run a property suite')
    verify.add_argument('suite', type=str, help=f"One of: {', '.join(SUITES)}")
    verify.add_argument('--tol', type=float, default=None, help='Override the tolerance of scalable checks')
    verify.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')

    train = sub.add_parser('train', parents=[common], help='Train from a configuration file')
    train.add_argument(
        '-c', '--config',
        type=str,
        default='config/projectile.yaml',
        help='Path to configuration file (default: config/projectile.yaml)'
    )
    train.add_argument('-o', '--out', type=str, default='out', help='Output directory (default: out)')

    experiment = sub.add_parser('experiment', parents=[common], help='Run a built-in experiment')
    experiment.add_argument('name', type=str, help=f"One of: {', '.join(EXPERIMENTS)}")
    experiment.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    experiment.add_argument('-o', '--out', type=str, default=None, help='Output directory (default: out/<name>)')
    experiment.add_argument('--epochs', type=int, default=None, help='Override the number of epochs')
    return parser


# === Signal handler for Ctrl+C ===
def install_interrupt_handler(stop_flag: threading.Event) -> None:
    """第一次 Ctrl+C 讓訓練在目前 batch 結束後停止並寫出結果，第二次直接中斷"""
    if threading.current_thread() is not threading.main_thread():
        return

    def signal_handler(sig, frame):
        if stop_flag.is_set():
            raise KeyboardInterrupt
        print("\n")
        logger.warning("Received interrupt signal (Ctrl+C). Stopping after the current batch...")
        stop_flag.set()

    signal.signal(signal.SIGINT, signal_handler)


def cmd_verify(args) -> int:
    report = run_suite(args.suite, tol=args.tol, seed=args.seed)
    Display().print_verify_report(report)
    for check in report.failures:
        logger.error(f"{args.suite}: '{check.name}' failed ({check.error:.3e} vs {check.tol:.1e})")
    return EXIT_OK if report.passed else EXIT_FAILED


def _finish(display: Display, summary: dict, out_dir: str) -> int:
    display.print_final_statistics()
    display.print_depth_table(os.path.join(out_dir, "depth_profile.csv"))
    display.print_summary(summary)
    return EXIT_OK


def cmd_train(args, stop_flag: threading.Event) -> int:
    # === Load parsed config ===
    cfg = parse_config(args.config)
    display_config(cfg)
    setup = build_task(cfg, cfg.train.seed)
    recorder = Recorder()
    display = Display(recorder)
    summary = run_task(setup, cfg.train, args.out, cfg.train.seed, stop_flag=stop_flag, recorder=recorder)
    return _finish(display, summary, args.out)


def cmd_experiment(args, stop_flag: threading.Event) -> int:
    out_dir = args.out or os.path.join("out", args.name)
    recorder = Recorder()
    display = Display(recorder)
    summary = run_experiment(args.name, args.seed, out_dir, epochs=args.epochs, stop_flag=stop_flag,
                             recorder=recorder)
    return _finish(display, summary, out_dir)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    # === Setup logger ===
    setup_logger()
    set_log_level_by_name(args.log_level)

    stop_flag = threading.Event()
    install_interrupt_handler(stop_flag)

    try:
        if args.command == 'verify':
            return cmd_verify(args)
        if args.command == 'train':
            return cmd_train(args, stop_flag)
        return cmd_experiment(args, stop_flag)
    except (UnknownSuite, UnknownExperiment, ConfigParseError) as e:
        print(f"Error: {e}")
        return EXIT_USAGE
    except DivergedTraining as e:
        print(f"Error: training diverged: {e}")
        return EXIT_FAILED
    except OSError as e:
        print(f"Error: {e}")
        return EXIT_IO
    except InImNetError as e:
        print(f"Error: {e}")
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
