from typing import List

from fastapi import APIRouter, Depends, HTTPException, Path, status

from strategic_bandits.schemas.results import AggregateResult, ResultListing
from strategic_bandits.storage.results_store import ResultsStore

router = APIRouter(prefix="/api/results", tags=["Results"])


def get_store() -> ResultsStore:
    return ResultsStore()


@router.get("", response_model=List[ResultListing])
async def list_results(store: ResultsStore = Depends(get_store)) -> List[ResultListing]:
    """
    List persisted results in the output directory
    """
    return store.list()


@router.get("/{name}", response_model=AggregateResult)
async def get_result(
    name: str = Path(..., description="Result stem, <scenario>__<policy>"),
    store: ResultsStore = Depends(get_store),
) -> AggregateResult:
    """
    Get one persisted aggregate result
    """
    if "/" in name or name.startswith("."):
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Result not found")
    try:
        return store.load(store.out_dir / name).result
    except FileNotFoundError:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Result not found")
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=f"Unreadable result: {str(e)}")
