def load(path):
    """Reads raw data."""
    return path


def transform(data):
    """Uppercases the payload."""
    return data.upper()
