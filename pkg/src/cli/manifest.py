import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from utils.config import VERSION

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SNAPSHOT_NAME = "config.ini"


@dataclass
class RunManifest:
    """Record of one CLI run: resolved configuration and what it wrote."""

    subcommand: str
    config: dict
    outputs: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    version: str = VERSION
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    @classmethod
    def for_settings(cls, subcommand: str, settings) -> "RunManifest":
        parser = settings.to_parser()
        config = {name: dict(parser[name]) for name in parser.sections()}
        return cls(subcommand, config)

    def add_output(self, path: str) -> str:
        self.outputs.append(os.path.basename(path))
        return path

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, MANIFEST_NAME)
        os.makedirs(out_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, default=str)
            f.write("\n")
        logger.info("wrote %s", path)
        return path
