"""Run the gateway under uvicorn."""

from __future__ import annotations

import argparse
from pathlib import Path

import uvicorn

from .app import create_app
from .config import GatewayConfig


def main(argv=None):
    parser = argparse.ArgumentParser(description="serve the generation gateway")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file")
    parser.add_argument("--mode", choices=["stub", "live"], default=None)
    parser.add_argument("--fixtures", type=Path, default=None,
                        help="fixture directory for stub mode")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    raw = {}
    if args.config is not None:
        import json
        raw = json.loads(args.config.read_text())
    if args.mode:
        raw["mode"] = args.mode
    if args.fixtures:
        raw["fixture_dir"] = str(args.fixtures)
    raw.setdefault("mode", "stub")
    if raw["mode"] == "stub":
        raw.setdefault("fixture_dir", "fixtures")
        Path(raw["fixture_dir"]).mkdir(parents=True, exist_ok=True)

    config = GatewayConfig.from_dict(raw)
    uvicorn.run(create_app(config), host=args.host, port=args.port,
                workers=args.workers)


if __name__ == "__main__":
    main()
