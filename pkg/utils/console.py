"""
Console Output
Tagged progress messages, gated by a global verbosity level
"""

import sys

# 0 = quiet, 1 = normal, 2 = verbose
_verbosity = 1


def set_verbosity(level: int):
    global _verbosity
    _verbosity = max(0, int(level))


def get_verbosity() -> int:
    return _verbosity


def log(tag: str, message: str, level: int = 1):
    """
    Print a tagged line to stderr

    Args:
        tag: Short source label, printed as [tag]
        message: Text to print
        level: Minimum verbosity at which the line is shown
    """
    if _verbosity >= level:
        print(f"[{tag}] {message}", file=sys.stderr)


def progress(done: int, total: int, tag: str = 'Progress', every: int = 10):
    """Print 'done/total' every `every` items and at the end"""
    if _verbosity < 1 or total <= 0:
        return
    if done == total or done % max(1, every) == 0:
        print(f"[{tag}] {done}/{total}", file=sys.stderr)


def banner(title: str):
    if _verbosity < 1:
        return
    print("=" * 60, file=sys.stderr)
    print(title, file=sys.stderr)
    print("=" * 60, file=sys.stderr)


def echo(text: str = '', level: int = 1):
    """Untagged report line"""
    if _verbosity >= level:
        print(text, file=sys.stderr)
