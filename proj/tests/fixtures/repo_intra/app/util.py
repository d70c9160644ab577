def helper(x):
    """Doubles a value."""
    return x * 2


def outer(n):
    """Runs the helper pipeline."""
    def inner(v):
        return helper(v) + 1
    total = inner(n)
    return total


def compute(a, b):
    """Adds doubled values."""
    return helper(a) + helper(b)


def recurse(n):
    """Counts down."""
    if n:
        return recurse(n - 1)
    return 0
