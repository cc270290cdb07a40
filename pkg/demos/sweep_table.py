"""Sweep a small grid, crystalline column included, and print the summary."""

from kisinred.pipeline import format_summary, sweep

_, rows = sweep("p=3,5;k=5:7;v=-5,-3,oo")
print(format_summary(rows))
