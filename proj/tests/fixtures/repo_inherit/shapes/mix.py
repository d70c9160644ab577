class LogMixin:
    def log(self, msg):
        """Records a message."""
        return msg
