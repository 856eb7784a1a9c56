"""Desk-scale pipeline for flagging echosounder pings whose automatic
bottom line needs expert correction."""

__version__ = "0.1.0"
