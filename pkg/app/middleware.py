"""
Custom Middleware
================

Description: Request/response logging middleware with timing
Version: 1.0.0

Every request is logged with method, path and client; every response with
status and elapsed time, which is also returned in the X-Process-Time header.
Session ids in the path are shortened in the log lines.
"""

import logging
import re
import time

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware

logger = logging.getLogger(__name__)

_SESSION_ID = re.compile(r"(/sessions/)([0-9a-f]{8})[0-9a-f]{24}")


def _short_path(path: str) -> str:
    return _SESSION_ID.sub(r"\1\2", path)


class LoggingMiddleware(BaseHTTPMiddleware):
    async def dispatch(self, request: Request, call_next):
        start_time = time.perf_counter()

        method = request.method
        path = _short_path(request.url.path)
        client_ip = request.client.host if request.client else "unknown"

        logger.info(f"Request: {method} {path} from {client_ip}")

        try:
            response = await call_next(request)

            process_time = time.perf_counter() - start_time
            if process_time > 5:
                logger.warning(f"Slow response: {method} {path} - Status: {response.status_code} - Time: {process_time:.3f}s")
            else:
                logger.info(f"Response: {method} {path} - Status: {response.status_code} - Time: {process_time:.3f}s")

            response.headers["X-Process-Time"] = f"{process_time:.6f}"
            return response

        except Exception as e:
            process_time = time.perf_counter() - start_time
            logger.error(f"Error: {method} {path} - Exception: {str(e)} - Time: {process_time:.3f}s")
            raise
