from sobolev.models.base import Base
from sobolev.models.run import BenchRecord, BenchRun

__all__ = ["Base", "BenchRecord", "BenchRun"]
