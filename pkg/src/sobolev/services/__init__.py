from sobolev.services.bench_service import BenchResult, BenchService
from sobolev.services.estimation_service import EstimationService, Quantity, RescaleOption
from sobolev.services.run_service import RunService

__all__ = [
    "BenchResult",
    "BenchService",
    "EstimationService",
    "Quantity",
    "RescaleOption",
    "RunService",
]
