from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from dotenv import load_dotenv
from prometheus_fastapi_instrumentator import Instrumentator

load_dotenv()

# Initialisation FastAPI
app = FastAPI(
    title="DMG API",
    description="API des solveurs multigrilles directs rouge-noir et de leur batterie de vérification",
    version="1.0.0"
)

# Importer et inclure le router DMG
from dmg.api import router as dmg_router
app.include_router(dmg_router)

# Monitoring via Prometheus
try:
    instrumentator = Instrumentator()
    instrumentator.instrument(app).expose(app, endpoint="/metrics")
except ImportError:
    print("prometheus_fastapi_instrumentator is not installed. Monitoring not enabled.")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/")
def root():
    return {"message": "API DMG en ligne 👋"}
