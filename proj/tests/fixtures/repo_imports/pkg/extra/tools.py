def fmt(x):
    """Formats a value."""
    return str(x)


def fallback(x):
    """Identity formatting."""
    return x
