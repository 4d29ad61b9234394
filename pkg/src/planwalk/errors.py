"""Shared exception base so the CLI can catch toolkit faults in one place."""


class PlanwalkError(Exception):
    pass
