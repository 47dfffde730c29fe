from __future__ import annotations

import logging

from matchcast.schemas.audit_log import RunFlag

logger = logging.getLogger("matchcast.audit")


class FlagTrail:
    """Накопитель замечаний одного прогона (по модели)."""

    def __init__(self) -> None:
        self._flags: list[RunFlag] = []

    def __len__(self) -> int:
        return len(self._flags)

    def __iter__(self):
        return iter(self._flags)

    @property
    def flags(self) -> list[RunFlag]:
        return list(self._flags)

    def append(self, flag: RunFlag) -> None:
        self._flags.append(flag)


def _entity_value(e) -> str | None:
    if e is None:
        return None
    return getattr(e, "value", str(e))


def log_action(
    trail: FlagTrail | None,
    *,
    action: str,
    entity=None,
    details: str | None = None,
) -> RunFlag | None:
    """
    Универсальная запись замечания прогона.
    Не бросает исключения наружу.
    """
    try:
        flag = RunFlag(action=action, entity=_entity_value(entity), details=details)
        logger.warning("%s entity=%s %s", action, flag.entity, details or "")
        if trail is not None:
            trail.append(flag)
        return flag
    except Exception:
        # запись не удалась: прогон продолжается
        try:
            logger.exception("failed to record flag %s", action)
        except Exception:
            pass
        return None
