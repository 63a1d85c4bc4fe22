"""Per-team token accounting with weekly budget resets."""

from dataclasses import asdict, dataclass, field

WEEK_S = 7 * 24 * 3600.0
DEFAULT_RATE = 10.0  # tokens per node-hour


class ResourceError(RuntimeError):
    """Request cannot be served with the tokens or nodes available."""


class InsufficientTokensError(ResourceError):
    pass


class UnknownTeamError(LookupError):
    pass


@dataclass
class TeamAccount:
    balance: float
    budget: float
    last_reset: float


@dataclass
class TokenLedger:
    teams: dict = field(default_factory=dict)
    # (kind, team, delta, balance_after) for every mutation
    history: list = field(default_factory=list)

    def add_team(self, team, budget, now):
        if budget < 0:
            raise ValueError("budget must be ≥ 0")
        self.teams[team] = TeamAccount(float(budget), float(budget), float(now))
        self.history.append(("create", team, float(budget), float(budget)))

    def set_budget(self, team, budget):
        self.account(team).budget = float(budget)

    def account(self, team) -> TeamAccount:
        try:
            return self.teams[team]
        except KeyError:
            raise UnknownTeamError(f"unknown team {team!r}") from None

    def balance(self, team):
        return self.account(team).balance

    def can_afford(self, team, cost):
        return self.account(team).balance >= cost

    def charge(self, team, cost):
        """Debit ``cost`` or raise, leaving the balance untouched."""
        acct = self.account(team)
        if cost < 0:
            raise ValueError("cost must be ≥ 0")
        if acct.balance < cost:
            raise InsufficientTokensError(
                f"team {team!r} has {acct.balance:g} tokens, needs {cost:g}")
        acct.balance -= cost
        self.history.append(("charge", team, -cost, acct.balance))

    def weekly_reset(self, now):
        """Refill every team whose last reset is at least a week old.

        ``last_reset`` advances by whole weeks, so resets stay on the weekly grid.
        """
        for team, acct in self.teams.items():
            elapsed = now - acct.last_reset
            if elapsed >= WEEK_S:
                weeks = int(elapsed // WEEK_S)
                delta = acct.budget - acct.balance
                acct.balance = acct.budget
                acct.last_reset += weeks * WEEK_S
                self.history.append(("reset", team, delta, acct.balance))

    def to_dict(self):
        return {"teams": {k: asdict(v) for k, v in sorted(self.teams.items())}}

    @classmethod
    def from_dict(cls, d):
        return cls({k: TeamAccount(**v) for k, v in d.get("teams", {}).items()})


def weekly_reset(ledger: TokenLedger, now):
    ledger.weekly_reset(now)
