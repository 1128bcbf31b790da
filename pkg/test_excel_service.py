#!/usr/bin/env python3
"""
Test Excel export of channel reports
"""
import os

from openpyxl import load_workbook

from brw_source.excel_service import ExcelExportService
from brw_source.services.wdm import ChannelCount, ChannelRecord, ChannelReport


def sample_report():
    return ChannelReport(channels=[
        ChannelRecord(n=1, alpha=0.5, beta=0.5, gamma=complex(0.49, 0.01), concurrence=0.98,
                      lambda_upper_nm=1549.6, lambda_lower_nm=1550.4, pair_rate=1.5e5),
        ChannelRecord(n=2, alpha=0.52, beta=0.48, gamma=complex(0.45, 0.0), concurrence=0.9,
                      lambda_upper_nm=1549.2, lambda_lower_nm=1550.8, pair_rate=1.4e5),
    ])


def test_export_channel_report(tmp_path):
    """Test workbook sheets, header and summary"""
    counts = [ChannelCount(threshold=0.95, contiguous=1, total=1)]
    path = ExcelExportService(str(tmp_path)).export_channel_report(sample_report(), counts)
    assert os.path.exists(path)

    workbook = load_workbook(path)
    assert workbook.sheetnames == ["Channels", "Summary"]
    channels = workbook["Channels"]
    assert channels["A1"].value == "n"
    assert channels["A1"].font.bold
    assert channels.max_row == 3

    summary = workbook["Summary"]
    rows = [tuple(row) for row in summary.iter_rows(values_only=True)]
    assert ("Channels", 2) in rows
    assert any(str(label).strip() == "C > 0.95" and value == "1 / 1" for label, value in rows)


def test_export_empty_report(tmp_path):
    """Test an empty report still produces a workbook"""
    path = ExcelExportService(str(tmp_path)).export_channel_report(ChannelReport(), [], filename="empty.xlsx")
    workbook = load_workbook(path)
    assert workbook["Channels"].max_row == 1
