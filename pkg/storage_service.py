"""
Artifact storage for rule documents, point dumps and experiment tables.

Backends never raise on I/O failure: `save_bytes` reports through a result dict
and the read side falls back to None / False.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional
import io
import logging
import os

import boto3
from botocore.config import Config as BotoConfig
from botocore.exceptions import ClientError, NoCredentialsError
from werkzeug.utils import secure_filename

from config import DEFAULT_OUTPUT_DIR, DEFAULT_S3_REGION

logger = logging.getLogger(__name__)

PRESIGNED_URL_TTL = 3600


def _stored(url: str, name: str, size: int) -> dict:
    return {'success': True, 'url': url, 'filename': name, 'size': size}


def _failed(name: str, error: str) -> dict:
    return {'success': False, 'error': error, 'filename': name}


def _error_code(e: ClientError) -> str:
    return e.response.get('Error', {}).get('Code', 'Unknown')


class StorageService(ABC):
    """Where result artifacts go."""

    @abstractmethod
    def save_bytes(self, data: bytes, filename: str, content_type: Optional[str] = None) -> dict:
        """
        Store one artifact under a sanitized name.

        Args:
            data: artifact content
            filename: requested name; passed through secure_filename
            content_type: MIME type, recorded where the backend supports it

        Returns:
            {'success': True, 'url', 'filename', 'size'} or
            {'success': False, 'error', 'filename'}
        """

    @abstractmethod
    def read_bytes(self, filename: str) -> Optional[bytes]:
        """
        Read a stored artifact back.

        Args:
            filename: name the artifact was stored under

        Returns:
            The content, or None when missing or unreadable
        """

    @abstractmethod
    def get_file_url(self, filename: str) -> str:
        """
        Location of a stored artifact.

        Args:
            filename: name the artifact was stored under

        Returns:
            A file:// URI locally, a presigned HTTPS URL on S3
        """

    @abstractmethod
    def file_exists(self, filename: str) -> bool:
        """
        Args:
            filename: name the artifact was stored under

        Returns:
            True if the artifact is present
        """


class S3StorageService(StorageService):
    """Private bucket, one key prefix per run, shared through presigned URLs."""

    def __init__(self, bucket_name: str, region: str = DEFAULT_S3_REGION, prefix: str = 'rqmc'):
        """
        Args:
            bucket_name: S3 bucket
            region: AWS region; presigned URLs use its regional endpoint
            prefix: key prefix, usually one per run

        Raises:
            ValueError: when boto3 finds no credentials
        """
        self.bucket_name = bucket_name
        self.region = region
        self.prefix = f"{prefix.strip('/')}/" if prefix else ''
        try:
            self.s3_client = boto3.client(
                's3',
                region_name=region,
                aws_access_key_id=os.environ.get('AWS_ACCESS_KEY_ID'),
                aws_secret_access_key=os.environ.get('AWS_SECRET_ACCESS_KEY'),
                config=BotoConfig(region_name=region, signature_version='s3v4',
                                  s3={'addressing_style': 'virtual'}),
            )
        except NoCredentialsError:
            raise ValueError("AWS credentials not found. Set AWS_ACCESS_KEY_ID and AWS_SECRET_ACCESS_KEY.")
        logger.info(f"S3 artifact storage: s3://{bucket_name}/{self.prefix} ({region})")

    def _key(self, filename: str) -> str:
        return self.prefix + secure_filename(filename)

    def save_bytes(self, data: bytes, filename: str, content_type: Optional[str] = None) -> dict:
        name = secure_filename(filename)
        extra = {'ContentType': content_type} if content_type else {}
        try:
            self.s3_client.upload_fileobj(io.BytesIO(data), self.bucket_name, self._key(name), ExtraArgs=extra)
        except ClientError as e:
            logger.error(f"S3 upload of {name} failed: {e}")
            return _failed(filename, f"S3 upload failed: {_error_code(e)}")
        except Exception as e:
            logger.error(f"S3 upload of {name} failed: {e}")
            return _failed(filename, str(e))
        logger.info(f"Uploaded {self._key(name)} ({len(data)} bytes)")
        return _stored(self.get_file_url(name), name, len(data))

    def read_bytes(self, filename: str) -> Optional[bytes]:
        try:
            obj = self.s3_client.get_object(Bucket=self.bucket_name, Key=self._key(filename))
            return obj['Body'].read()
        except Exception as e:
            logger.error(f"S3 read of {filename} failed: {e}")
            return None

    def get_file_url(self, filename: str) -> str:
        key = self._key(filename)
        try:
            url = self.s3_client.generate_presigned_url(
                'get_object', Params={'Bucket': self.bucket_name, 'Key': key}, ExpiresIn=PRESIGNED_URL_TTL)
        except Exception as e:
            logger.error(f"Could not presign {key}: {e}")
            return f"https://{self.bucket_name}.s3.{self.region}.amazonaws.com/{key}"
        # the global endpoint redirects with a 307 that invalidates the signature
        return url.replace('.s3.amazonaws.com/', f'.s3.{self.region}.amazonaws.com/')

    def file_exists(self, filename: str) -> bool:
        try:
            self.s3_client.head_object(Bucket=self.bucket_name, Key=self._key(filename))
            return True
        except ClientError as e:
            if _error_code(e) not in ('404', 'NoSuchKey'):
                logger.error(f"S3 head_object failed for {filename}: {e}")
        except Exception as e:
            logger.error(f"S3 head_object failed for {filename}: {e}")
        return False


class LocalStorageService(StorageService):
    """Directory on disk; the default backend."""

    def __init__(self, base_path: str):
        """
        Args:
            base_path: artifact directory, created if missing
        """
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)
        logger.info(f"Local artifact storage: {self.base_path}")

    def _path(self, filename: str) -> Path:
        return self.base_path / secure_filename(filename)

    def save_bytes(self, data: bytes, filename: str, content_type: Optional[str] = None) -> dict:
        path = self._path(filename)
        try:
            path.write_bytes(data)
        except OSError as e:
            logger.error(f"Writing {path} failed: {e}")
            return _failed(filename, str(e))
        size = path.stat().st_size
        logger.info(f"Wrote {path} ({size} bytes)")
        return _stored(self.get_file_url(path.name), path.name, size)

    def read_bytes(self, filename: str) -> Optional[bytes]:
        try:
            return self._path(filename).read_bytes()
        except OSError as e:
            logger.error(f"Reading {filename} failed: {e}")
            return None

    def get_file_url(self, filename: str) -> str:
        return self._path(filename).resolve().as_uri()

    def file_exists(self, filename: str) -> bool:
        return self._path(filename).is_file()


def create_storage_service(use_s3: bool = False, prefix: str = 'rqmc', base_path: str = DEFAULT_OUTPUT_DIR,
                           bucket_name: str = '', region: str = DEFAULT_S3_REGION) -> StorageService:
    """
    Pick the backend: S3 when asked for and usable, the local directory otherwise.

    Args:
        use_s3: prefer S3
        prefix: S3 key prefix
        base_path: local artifact directory
        bucket_name: S3 bucket
        region: S3 region

    Returns:
        StorageService instance
    """
    if use_s3 and not (os.environ.get('AWS_ACCESS_KEY_ID') and os.environ.get('AWS_SECRET_ACCESS_KEY')):
        logger.warning("AWS credentials not found. Falling back to local storage.")
        use_s3 = False
    elif use_s3 and not bucket_name:
        logger.warning("No S3 bucket configured. Falling back to local storage.")
        use_s3 = False
    if use_s3:
        return S3StorageService(bucket_name=bucket_name, region=region, prefix=prefix)
    return LocalStorageService(base_path=base_path)
