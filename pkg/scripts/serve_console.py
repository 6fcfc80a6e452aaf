#!/usr/bin/env python3
"""Start the assessment service and explain how to open the console."""

import argparse

import uvicorn

from famsec.service import ServiceConfig, create_app


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8700)
    parser.add_argument("--state-dir", default="service_state")
    parser.add_argument("--model", default=None, help="surrogate model for trusted predictions")
    args = parser.parse_args()

    config = ServiceConfig.load()
    config.state_dir = args.state_dir
    if args.model:
        config.surrogate_model_path = args.model
    print(f"service on http://{args.host}:{args.port}")
    print("console: build frontend (cd frontend && npm run build), then serve index.html,")
    print("e.g.  python3 -m http.server -d frontend 8080   and open http://127.0.0.1:8080")
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
