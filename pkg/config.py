"""
Runtime configuration read from the environment.
"""
from dataclasses import dataclass
import os

DEFAULT_DATABASE_URL = 'sqlite:///instance/rqmc_results.db'
DEFAULT_OUTPUT_DIR = os.path.join('instance', 'results')
DEFAULT_S3_REGION = 'eu-central-1'


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name, '')
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


@dataclass
class Config:
    threads: int
    database_url: str
    output_dir: str
    s3_bucket: str
    s3_region: str
    log_level: str

    @classmethod
    def from_env(cls) -> 'Config':
        return cls(
            threads=_int_env('RQMC_THREADS', os.cpu_count() or 1),
            database_url=os.environ.get('RQMC_DATABASE_URL', DEFAULT_DATABASE_URL),
            output_dir=os.environ.get('RQMC_OUTPUT_DIR', DEFAULT_OUTPUT_DIR),
            s3_bucket=os.environ.get('RQMC_S3_BUCKET', ''),
            s3_region=os.environ.get('RQMC_S3_REGION', DEFAULT_S3_REGION),
            log_level=os.environ.get('RQMC_LOG_LEVEL', 'INFO').upper(),
        )

    @property
    def use_s3(self) -> bool:
        """S3 only when a bucket is configured and AWS credentials are present."""
        return bool(self.s3_bucket and os.environ.get('AWS_ACCESS_KEY_ID')
                    and os.environ.get('AWS_SECRET_ACCESS_KEY'))
