from pydantic import BaseModel, ConfigDict


class RunFlag(BaseModel):
    """Замечание прогона: что случилось, с чем и подробности. Без времени."""

    model_config = ConfigDict(frozen=True)

    action: str              # например PREDICTOR_FAILED
    entity: str | None = None  # модель / сезон / тур
    details: str | None = None
