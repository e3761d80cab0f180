import logging
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import uvicorn
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .. import __version__
from ..config import configure_logging, settings
from ..deformation import apply_deformation, predicted_kmn
from ..examples import ENTRY_NAMES, get_entry, registry
from ..expr import ExprError
from ..geometry import EvaluationError, ManifestError, ManifoldSpec, PreconditionError, parse_manifest
from ..kmn import KmnGrid, extract_kmn, extract_over_grid
from ..verify import VerificationReport, run_suite

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="KMN Curvature Verifier",
    description="Numerical verification of (kappa, mu, nu)-contact metric manifolds",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

INPUT_ERRORS = (ManifestError, ExprError, EvaluationError, PreconditionError)


class ManifestSource(BaseModel):
    """Either an inline manifest document or the name of a registry entry."""

    manifest: Optional[Dict[str, Any]] = None
    example: Optional[str] = None


class VerifyRequest(ManifestSource):
    grid: Optional[int] = Field(default=None, ge=1)
    fd_step: Optional[float] = Field(default=None, gt=0)


class ExtractRequest(ManifestSource):
    grid: Optional[int] = Field(default=None, ge=1)


class DeformRequest(ManifestSource):
    a: float = Field(gt=0)


def resolve_source(request: ManifestSource) -> ManifoldSpec:
    if (request.manifest is None) == (request.example is None):
        raise HTTPException(status_code=422, detail="Provide exactly one of 'manifest' or 'example'")
    if request.example is not None:
        try:
            return get_entry(request.example).spec
        except KeyError:
            raise HTTPException(status_code=404, detail=f"Unknown registry entry '{request.example}'")
    return parse_manifest(request.manifest or {}, source_path="request")


@app.get("/")
async def root():
    """Root endpoint with basic information."""
    return {
        "message": "KMN Curvature Verifier API",
        "version": __version__,
        "status": "running",
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "timestamp": datetime.now(timezone.utc).isoformat()}


@app.get("/examples")
def list_examples() -> Dict[str, List[Dict[str, Any]]]:
    """List the built-in registry."""
    try:
        entries = [
            {
                "name": e.name,
                "backend": e.spec.backend.value,
                "dimension": e.spec.dimension,
                "description": e.spec.description,
                "expected": e.expected.model_dump(exclude_none=True),
            }
            for e in registry()
        ]
        return {"examples": entries}
    except ManifestError as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/examples/{name}")
def get_example(name: str) -> Dict[str, Any]:
    """Manifest document of one registry entry."""
    if name not in ENTRY_NAMES:
        raise HTTPException(status_code=404, detail=f"Unknown registry entry '{name}'")
    return get_entry(name).spec.to_manifest().model_dump(mode="json", exclude_none=True)


@app.post("/verify", response_model=VerificationReport)
def verify(request: VerifyRequest) -> VerificationReport:
    """Run the full verification suite."""
    try:
        spec = resolve_source(request)
        return run_suite(spec, grid=request.grid, fd_step=request.fd_step)
    except HTTPException:
        raise
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Failed to verify manifest: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/extract", response_model=KmnGrid)
def extract(request: ExtractRequest) -> KmnGrid:
    """Pointwise (kappa, mu, nu) over the sample grid."""
    try:
        spec = resolve_source(request)
        return extract_over_grid(spec, spec.sample_points(request.grid))
    except HTTPException:
        raise
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Failed to extract kappa, mu, nu: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/deform")
def deform(request: DeformRequest) -> Dict[str, Any]:
    """Deformed manifest plus extracted and predicted (kappa, mu, nu) at the domain center."""
    try:
        spec = resolve_source(request)
        deformed = apply_deformation(spec, request.a)
        center = spec.center()
        before = extract_kmn(spec, center)
        after = extract_kmn(deformed, center)
        return {
            "manifest": deformed.to_manifest().model_dump(mode="json", exclude_none=True),
            "original": before.model_dump(),
            "extracted": after.model_dump(),
            "predicted": predicted_kmn(before.kappa, before.mu, before.nu, request.a),
        }
    except HTTPException:
        raise
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Failed to deform manifest: {e}")
        raise HTTPException(status_code=500, detail=str(e))


if __name__ == "__main__":
    uvicorn.run(
        "kmnverify.api.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=settings.debug,
    )
