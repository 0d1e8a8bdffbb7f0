import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from strategic_bandits.api.routes.preset_routes import router as preset_router
from strategic_bandits.api.routes.result_routes import router as result_router
from strategic_bandits.config import get_settings

settings = get_settings()

logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Strategic Bandits API",
    description="Read-only views of presets, regret bounds and persisted experiment results",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET"],
    allow_headers=["*"],
)

app.include_router(preset_router)
app.include_router(result_router)


@app.get("/")
async def root():
    return {"message": "Strategic Bandits API is running", "results_dir": str(settings.out_dir)}


@app.on_event("startup")
async def startup_event():
    logger.info(f"Serving results from {settings.out_dir}")


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("strategic_bandits.main:app", host="0.0.0.0", port=8000, reload=True)
