#!/usr/bin/env python3
"""
Quick server runner for the verification API
"""

import os
import sys

import uvicorn

# Add src to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from kmnverify.config import settings  # noqa: E402

if __name__ == "__main__":
    print("Starting KMN Curvature Verifier API...")
    print(f"Server will be available at: http://localhost:{settings.api_port}")
    print(f"API Documentation: http://localhost:{settings.api_port}/docs")
    print("Press Ctrl+C to stop the server")
    print("-" * 60)

    uvicorn.run(
        "kmnverify.api.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=settings.debug,
        reload_dirs=["src"],
        log_level=settings.log_level.lower(),
    )
