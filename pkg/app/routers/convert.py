from fastapi import APIRouter, HTTPException
from app.core.errors import SweepError
from app.schemas.requests import ConvertRequest
from app.schemas.responses import ConvertResponse
from app.services.codecs import cashaddr_to_legacy, legacy_to_cashaddr
import logging

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/convert", tags=["convert"])


@router.post("/cashaddr", response_model=ConvertResponse)
async def convert_cashaddr(request: ConvertRequest):
    """
    Convert between legacy Base58 and CashAddr Bitcoin Cash addresses.

    Example Request:
    POST http://localhost:8000/api/convert/cashaddr
    {
        "address": "1PSRcasBNEwPC2TWUB68wvQZHwXy4yqPQ3"
    }
    """
    address = request.address.strip()
    try:
        if address[:1] in ("1", "3"):
            legacy = address
            cashaddr = legacy_to_cashaddr(address, with_prefix=request.with_prefix)
        else:
            legacy = cashaddr_to_legacy(address)
            cashaddr = legacy_to_cashaddr(legacy, with_prefix=request.with_prefix)
        return ConvertResponse(legacy=legacy, cashaddr=cashaddr)

    except SweepError as e:
        raise HTTPException(status_code=400, detail=str(e))
