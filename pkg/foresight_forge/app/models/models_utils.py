from datetime import datetime
from datetime import timezone


def get_timestamp() -> datetime:
    return datetime.now(tz=timezone.utc)
