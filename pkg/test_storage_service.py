import io
from unittest import mock

import pytest
from botocore.exceptions import ClientError

from storage_service import LocalStorageService, S3StorageService, create_storage_service


def test_local_storage(tmp_path):
    storage = LocalStorageService(str(tmp_path / "artifacts"))
    result = storage.save_bytes(b"method,size\n", "records.csv", "text/csv")
    assert result["success"]
    assert result["size"] == 12
    assert result["url"].startswith("file://")
    assert storage.file_exists("records.csv")
    assert storage.read_bytes("records.csv") == b"method,size\n"
    assert not storage.file_exists("summary.csv")
    assert storage.read_bytes("summary.csv") is None


def test_local_storage_sanitizes_names(tmp_path):
    storage = LocalStorageService(str(tmp_path))
    result = storage.save_bytes(b"x", "../../escape.txt")
    assert result["filename"] == "escape.txt"
    assert (tmp_path / "escape.txt").exists()


def test_factory_falls_back_to_local(monkeypatch, tmp_path):
    monkeypatch.delenv("AWS_ACCESS_KEY_ID", raising=False)
    monkeypatch.delenv("AWS_SECRET_ACCESS_KEY", raising=False)
    assert isinstance(create_storage_service(use_s3=True, base_path=str(tmp_path), bucket_name="b"),
                      LocalStorageService)
    monkeypatch.setenv("AWS_ACCESS_KEY_ID", "id")
    monkeypatch.setenv("AWS_SECRET_ACCESS_KEY", "secret")
    assert isinstance(create_storage_service(use_s3=True, base_path=str(tmp_path), bucket_name=""),
                      LocalStorageService)


def test_s3_storage_with_mocked_client():
    with mock.patch("storage_service.boto3.client") as client_factory:
        client = client_factory.return_value
        client.generate_presigned_url.return_value = "https://runs.s3.amazonaws.com/rqmc/run-1/rates.dat?sig=1"
        storage = S3StorageService(bucket_name="runs", region="eu-central-1", prefix="rqmc/run-1")
        result = storage.save_bytes(b"# mc\n", "rates.dat", "text/plain")
    assert result["success"]
    args, kwargs = client.upload_fileobj.call_args
    assert args[1:] == ("runs", "rqmc/run-1/rates.dat")
    assert kwargs["ExtraArgs"] == {"ContentType": "text/plain"}
    assert result["url"] == "https://runs.s3.eu-central-1.amazonaws.com/rqmc/run-1/rates.dat?sig=1"


def test_s3_upload_failure_is_reported():
    with mock.patch("storage_service.boto3.client") as client_factory:
        client_factory.return_value.upload_fileobj.side_effect = RuntimeError("network down")
        storage = S3StorageService(bucket_name="runs")
        result = storage.save_bytes(b"x", "summary.csv")
    assert not result["success"]
    assert "network down" in result["error"]


def test_s3_read_and_exists():
    with mock.patch("storage_service.boto3.client") as client_factory:
        client = client_factory.return_value
        client.get_object.return_value = {"Body": io.BytesIO(b"{}")}
        client.head_object.side_effect = [{"ContentLength": 2},
                                          ClientError({"Error": {"Code": "404"}}, "HeadObject")]
        storage = S3StorageService(bucket_name="runs", prefix="rqmc")
        assert storage.read_bytes("rule.json") == b"{}"
        assert storage.file_exists("rule.json")
        assert not storage.file_exists("other.json")
    assert client.get_object.call_args.kwargs == {"Bucket": "runs", "Key": "rqmc/rule.json"}


if __name__ == "__main__":
    pytest.main([__file__])
