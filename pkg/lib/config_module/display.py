"""
配置顯示工具
"""

from dataclasses import asdict

from colorama import Fore, Style

from .models import RunConfig


def display_config(config: RunConfig) -> None:
    """以易讀格式顯示配置信息"""
    print("Parsed Configuration:")
    print("=" * 50)

    print(Fore.GREEN + f"Task: {config.task.name}" + Style.RESET_ALL)
    for key, value in asdict(config.task).items():
        if key != "name":
            print(f"  {key}: {value}")

    train = config.train
    print(Fore.GREEN + f"\nTraining: {train.mode} / {train.optimizer}" + Style.RESET_ALL)
    print(f"  Learning Rate: {train.learning_rate} ({train.lr_schedule.kind})")
    if train.lr_schedule.kind == "exp_decay":
        print(f"    x{train.lr_schedule.factor} every {train.lr_schedule.step_epochs} epochs")
    print(f"  Epochs: {train.epochs}  Batch Size: {train.batch_size}")
    print(f"  Parameter Sharing: {train.parameter_sharing}")
    print(f"  Jacobian Scheme: {train.scheme}", end="")
    if train.scheme == "newton":
        print(f" (shift sign {train.newton_shift_sign:+g})", end="")
    print(" [implicit adjoint]" if train.implicit_adjoint else "")
    print(f"  Substeps: {train.substeps}  Seed: {train.seed}  Threads: {train.worker_count()}")
    print(Style.RESET_ALL, end="")
