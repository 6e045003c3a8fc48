"""
Stage handler for the experiment pipeline.

Accepts a stage payload (a single stage or ``all``), loads the experiment
configuration, runs the requested stages in order and returns a response
record with the status, a per-stage summary and, on failure, the error details.
"""

from typing import Any
import traceback

import structlog
from pydantic import ValidationError

from . import logsetup
from .constants import STAGES, stage_status
from .errors import StageDependencyError
from .models import StagePayload
from .pipeline import STAGE_RUNNERS, StageResult, apply_overrides, load_config

log = structlog.get_logger(__name__)


def handler(event: dict, context: Any | None = None, json_logs: bool = False) -> dict:
    """
    Run one stage, or every stage, of the experiment.

    :param event: Stage payload (``Stage`` plus ``Config`` or ``ConfigPath`` and optional overrides)
    :type event: dict
    :param context: Invocation context (unused)
    :type context: Any | None
    :param json_logs: Render log events as JSON lines
    :type json_logs: bool
    :returns: ``{"Response": {...}}`` with ``Status`` ``<STAGE>_COMPLETE`` or ``<STAGE>_FAILED``
    :rtype: dict

    Examples
    --------
    >>> event = {"Stage": "generate", "ConfigPath": "experiment.yaml", "OutputDir": "runs/demo"}
    >>> response = handler(event)  # doctest: +SKIP
    >>> # Returns: {"Response": {"Status": "GENERATE_COMPLETE", ...}}
    """

    stages_completed: list[str] = []
    summaries: list[dict] = []
    stage = None
    current = None

    try:
        payload = StagePayload.model_validate(event)
        stage = payload.stage

        config = payload.config if payload.config is not None else load_config(payload.config_path)
        config = apply_overrides(
            config,
            output_dir=payload.output_dir,
            seed=payload.seed,
            stage_seed_offset=payload.stage_seed_offset,
        )

        logsetup.setup(config.name, payload.log_level, json_logs=json_logs)
        log.debug("Stage payload", details=payload.model_dump(mode="json", exclude={"config"}))

        requested = STAGES if stage == "all" else [stage]

        for current in requested:
            log.info("Stage started", status=stage_status(current, "IN_PROGRESS"), stage=current)

            result: StageResult = STAGE_RUNNERS[current](config)

            summaries.append(result.as_summary())
            stages_completed.append(current)
            log.info(
                "Stage complete",
                status=stage_status(current, "COMPLETE"),
                details=result.as_summary(),
            )

        final = requested[-1]
        response = {
            "Status": stage_status(final, "COMPLETE"),
            "Message": f"Successfully ran {len(stages_completed)} stage(s)",
            "ConfigDigest": config.digest(),
            "OutputDir": config.output_dir,
        }
        if stage == "all":
            response["StagesCompleted"] = stages_completed
            response["StageSummaries"] = summaries
        else:
            response["StageSummary"] = summaries[0]

        log.debug("Returning stage response", details=response)
        return {"Response": response}

    except Exception as e:
        failed = current or stage

        validation_errors = []
        if isinstance(e, ValidationError):
            message = f"Stage failed ({type(e).__name__}): {e.title}"
            for error in e.errors():
                validation_errors.append(
                    {
                        "Field": " -> ".join(str(loc) for loc in error.get("loc", [])),
                        "Message": error.get("msg", ""),
                        "Type": error.get("type", ""),
                        "Input": str(error.get("input", "N/A")),
                    }
                )
        else:
            message = f"Stage failed ({type(e).__name__}): {str(e)}"

        error_details: dict[str, Any] = {"ErrorMessage": message}
        if validation_errors:
            error_details["ValidationErrors"] = validation_errors
        if stages_completed:
            error_details["StagesCompletedBeforeFailure"] = stages_completed
        if failed in STAGES:
            error_details["FailedStage"] = failed
        if isinstance(e, StageDependencyError) and e.missing:
            error_details["MissingFile"] = e.missing

        log.debug("Error traceback details", details={"FullTraceback": traceback.format_exc()})

        status = stage_status(failed, "FAILED") if failed in STAGES else "FAILED"
        log.error("Stage failed", status=status, details=error_details)

        return {
            "Response": {
                "Status": status,
                "Message": message,
                "ErrorDetails": error_details,
            }
        }
