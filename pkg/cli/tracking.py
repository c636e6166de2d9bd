"""
Optional Weights & Biases logging of experiment runs, enabled by WANDB_API_KEY.
"""
import wandb

from src.config import WANDB_API_KEY, WANDB_PROJECT
from src.logger import get_logger

logger = get_logger("Tracking")


def _scalars(block, prefix=""):
    """Flatten the numeric leaves of a nested result block."""
    out = {}
    for key, value in block.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_scalars(value, f"{name}/"))
        elif isinstance(value, (bool, int, float)):
            out[name] = value
    return out


def log_run(config, summary, api_key=WANDB_API_KEY):
    """Log the config and the scalar results of one run; no-op without an API key."""
    if not api_key:
        return False
    wandb.login(key=api_key)
    run = wandb.init(
        project=WANDB_PROJECT,
        name=f"{summary['pipeline']}-{summary['name']}",
        config=config,
    )
    wandb.log(_scalars(summary["results"]))
    wandb.log({"passed": summary["passed"]})
    run.finish()
    logger.info(f"Run logged to W&B project '{WANDB_PROJECT}'")
    return True
