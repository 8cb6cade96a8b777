from fastapi import APIRouter

from app.core.adversary.families import ny_hard_family
from app.core.adversary.game import make_strategy, play_mi_game
from app.schemas.game import GameReport, GameRequest

router = APIRouter(tags=["games"])


@router.post(
    "/games",
    response_model=GameReport,
    summary="Play the mixed-integer information game",
    description="Run one query strategy against the fiber-wise resisting oracle and audit the transcript",
)
def play_game(request: GameRequest) -> GameReport:
    family = ny_hard_family(request.d, request.M, request.R, request.eps, request.k)
    strategy = make_strategy(request.strategy, request.n, request.d, request.R, request.seed)
    return play_mi_game(
        family,
        request.n,
        request.eps,
        strategy,
        request.max_rounds,
        audit_samples=request.audit_samples,
        seed=request.seed,
    )
