"""
Phoenix observability configuration for eigenrand runs.

Tracing is optional: the `tracing` extra installs arize-phoenix, and spans
are only exported when PHOENIX_API_KEY is set. Without either, every helper
here is a no-op and the numerical results are unaffected.
"""
import logging
import os
from contextlib import contextmanager
from typing import Any, Iterator, Optional

logger = logging.getLogger("eigenrand.phoenix")

_tracer_provider: Optional[Any] = None


def setup_phoenix_observability() -> bool:
    """
    Setup Phoenix tracing for experiment and check spans.

    Returns:
        bool: True if Phoenix was successfully configured, False otherwise.

    Environment Variables:
        PHOENIX_API_KEY: Required API key from Phoenix Cloud
        PHOENIX_COLLECTOR_ENDPOINT: Optional custom endpoint (defaults to Phoenix Cloud)
        PHOENIX_PROJECT_NAME: Optional project name (defaults to 'eigenrand')
    """
    global _tracer_provider
    phoenix_api_key = os.getenv("PHOENIX_API_KEY")

    if not phoenix_api_key:
        logger.debug("PHOENIX_API_KEY not set; tracing disabled")
        return False

    try:
        from phoenix.otel import register
    except ImportError:
        print("⚠️  PHOENIX_API_KEY is set but arize-phoenix is not installed.")
        print("   Install the tracing extra: pip install 'eigenrand[tracing]'")
        return False

    try:
        phoenix_endpoint = os.getenv("PHOENIX_COLLECTOR_ENDPOINT", "https://app.phoenix.arize.com/v1/traces")
        project_name = os.getenv("PHOENIX_PROJECT_NAME", "eigenrand")

        # Phoenix Cloud uses the api_key header, not Bearer
        _tracer_provider = register(
            project_name=project_name,
            endpoint=phoenix_endpoint,
            headers={"api_key": phoenix_api_key},
        )

        print("✅ Phoenix observability enabled!")
        print(f"   Project: {project_name}")
        print(f"   Endpoint: {phoenix_endpoint}")
        print("   📊 Tracking: experiment and verification-check spans")
        return True

    except Exception as e:
        print(f"❌ Failed to setup Phoenix observability: {e}")
        print("   The program will continue without observability.")
        _tracer_provider = None
        return False


@contextmanager
def experiment_span(name: str, **attributes: Any) -> Iterator[None]:
    """Open a span named `name` when tracing is configured; otherwise do nothing."""
    if _tracer_provider is None:
        yield
        return
    tracer = _tracer_provider.get_tracer("eigenrand")
    with tracer.start_as_current_span(name) as span:
        for key, value in attributes.items():
            if isinstance(value, (str, bool, int, float)):
                span.set_attribute(f"eigenrand.{key}", value)
        yield


def cleanup_phoenix() -> None:
    """Flush pending spans and shut the tracer provider down."""
    global _tracer_provider
    if _tracer_provider is None:
        return
    try:
        _tracer_provider.force_flush()
        _tracer_provider.shutdown()
        print("🧹 Phoenix observability cleaned up")
    except Exception as e:
        print(f"⚠️  Error cleaning up Phoenix: {e}")
    finally:
        _tracer_provider = None
