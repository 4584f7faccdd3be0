"""
Shared field descriptors for the command layer.

Field construction validates its input and precomputes data (class number,
root intervals, prime factorizations) that every command reuses, so the
descriptors are created lazily and cached per process.
"""

from functools import lru_cache
from typing import Optional, Sequence, Tuple

from loguru import logger

from .services.base_field import ImagQuadField, class_number, new_field, unit_count
from .services.cm_field import TotallyRealField, new_real_field


class FieldContainer:
    """Lazily built, process-wide field descriptors"""

    @staticmethod
    @lru_cache(maxsize=None)
    def base_field(d_k: int) -> ImagQuadField:
        logger.info(f"Initializing base field d_k={d_k}...")
        k = new_field(d_k)
        logger.success(f"Base field ready: h={class_number(k)}, w={unit_count(k)}")
        return k

    @staticmethod
    @lru_cache(maxsize=None)
    def real_field(coeffs: Tuple[int, ...], d_k: Optional[int] = None) -> TotallyRealField:
        logger.info(f"Initializing totally real field {list(coeffs)}...")
        k = FieldContainer.base_field(d_k) if d_k is not None else None
        F = new_real_field(coeffs, k)
        logger.success(f"Totally real field ready: degree {F.n}, disc {F.disc_f}")
        return F

    @staticmethod
    def cleanup():
        FieldContainer.base_field.cache_clear()
        FieldContainer.real_field.cache_clear()


def get_base_field(d_k: int) -> ImagQuadField:
    return FieldContainer.base_field(d_k)


def get_real_field(coeffs: Sequence[int], d_k: Optional[int] = None) -> TotallyRealField:
    return FieldContainer.real_field(tuple(coeffs), d_k)
