from .app import create_app
from .service import JobService
from .storage import FileStore

__all__ = ["create_app", "JobService", "FileStore"]
