"""Sort-based aspect refactoring: plans, aspect text, edits, risk warnings."""

from .aspect_text import (
    AspectDoc,
    AspectSyntaxError,
    parse_aspect,
    parse_expr,
    render_doc,
)
from .plans import (
    EDIT_KINDS,
    WARNING_CATALOG,
    AspectTemplate,
    PlanError,
    RefactoringPlan,
    RiskWarning,
    SourceEdit,
    apply_edits,
    check_precedence,
    combine_plans,
    plan_cb,
    plan_ec,
    plan_ep,
    plan_for,
    plan_rl,
    plan_rsi,
    plan_sc,
    render_aspect,
)

__all__ = [
    "AspectDoc",
    "AspectSyntaxError",
    "AspectTemplate",
    "EDIT_KINDS",
    "PlanError",
    "RefactoringPlan",
    "RiskWarning",
    "SourceEdit",
    "WARNING_CATALOG",
    "apply_edits",
    "check_precedence",
    "combine_plans",
    "parse_aspect",
    "parse_expr",
    "plan_cb",
    "plan_ec",
    "plan_ep",
    "plan_for",
    "plan_rl",
    "plan_rsi",
    "plan_sc",
    "render_aspect",
    "render_doc",
]
