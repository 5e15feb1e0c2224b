"""Validation diagnostics shared by flows, policies and scenarios."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding. `code` is a stable machine-readable id."""

    code: str
    message: str
    where: str = ""

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "where": self.where}
