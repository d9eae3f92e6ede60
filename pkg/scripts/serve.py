#!/usr/bin/env python3
"""Run the HTTP service (and host the built web UI, when present).

Usage:
    python scripts/serve.py --data-dir ./kb-data --port 8600 \
        --static-dir frontend/dist [--defaults defaults.json]
"""

import argparse
import json

import uvicorn

from entlink.service import create_app


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="./kb-data", help="KB upload directory")
    parser.add_argument("--port", type=int, default=8600)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--static-dir", default=None, help="built web UI to host at /")
    parser.add_argument("--cache-dir", default=None, help="inference response cache")
    parser.add_argument("--defaults", default=None,
                        help="JSON file with partial default pipeline config")
    args = parser.parse_args()

    defaults = None
    if args.defaults:
        with open(args.defaults, encoding="utf-8") as f:
            defaults = json.load(f)

    app = create_app(
        data_dir=args.data_dir,
        defaults=defaults,
        cache_dir=args.cache_dir,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
