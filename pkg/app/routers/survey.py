from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool
from app.core.errors import SweepError
from app.schemas.requests import SurveyRequest
from app.schemas.responses import SurveyResponse
from app.services.survey import divisors_under, get_profile, report, report_data
import logging

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api", tags=["survey"])


@router.post("/survey", response_model=SurveyResponse)
async def survey_curve(request: SurveyRequest):
    """
    Catalog the subgroup orders of a curve's key space under a budget.

    Example Request:
    POST http://localhost:8000/api/survey
    {
        "curve": "curve25519",
        "budget": 4294967296,
        "rate": 50000
    }
    """
    try:
        catalog = await run_in_threadpool(divisors_under, get_profile(request.curve), request.budget)
        return SurveyResponse(
            report=report_data(catalog, request.rate),
            text=report(catalog, request.rate),
        )

    except SweepError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error in survey endpoint: {str(e)}")
        raise HTTPException(
            status_code=500,
            detail=f"Error building catalog: {str(e)}"
        )
