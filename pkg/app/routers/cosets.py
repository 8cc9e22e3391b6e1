from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool
from typing import List
from app.core.errors import SweepError
from app.schemas.responses import CosetResponse
from app.services.scalar_group import (
    COSET_COUNT,
    coset_generator,
    coset_spec,
    in_h,
    subgroup_order,
    verify_order,
)
import logging

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/cosets", tags=["cosets"])


def _describe(i: int) -> CosetResponse:
    g = coset_generator(i)
    order = subgroup_order(i)
    return CosetResponse(
        index=i,
        generator=g.hex(),
        representative=coset_spec(i).representative.hex(),
        order=str(order),
        order_value=str(order.product),
        order_verified=verify_order(g, order),
        disjoint_from_h=not in_h(g),
    )


@router.get("", response_model=List[CosetResponse])
async def list_cosets():
    """Generators, claimed orders and order checks for all eight cosets."""
    return await run_in_threadpool(lambda: [_describe(i) for i in range(COSET_COUNT)])


@router.get("/{index}", response_model=CosetResponse)
async def get_coset(index: int):
    """
    Example Request:
    GET http://localhost:8000/api/cosets/0
    """
    try:
        return await run_in_threadpool(_describe, index)
    except SweepError as e:
        raise HTTPException(status_code=404, detail=str(e))
