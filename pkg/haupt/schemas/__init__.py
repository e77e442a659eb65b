"""Pydantic schemas for reports and data files."""

from haupt.schemas.reports import CheckReport, MultiplicityReport, ReportEnvelope, Verdict, combine_verdicts
from haupt.schemas.groups import ClassEntry, GroupFile
