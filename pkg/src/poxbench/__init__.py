"""Forecasting engine and benchmark harness for weekly chickenpox case counts."""

import os

# The benchmark matrix parallelizes across processes; the linear algebra in a
# single cell is all small matrices, where BLAS threading only adds scheduling
# variance. Must be set before numpy loads its BLAS backend.
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

__version__ = "0.1.0"
