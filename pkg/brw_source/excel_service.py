import logging
import os
from typing import List

import pandas as pd
from openpyxl.styles import Alignment, Font, PatternFill

from brw_source.services.wdm import ChannelCount, ChannelReport

logger = logging.getLogger(__name__)


class ExcelExportService:
    def __init__(self, export_dir: str = "results"):
        self.export_dir = export_dir

    def export_channel_report(self, report: ChannelReport, counts: List[ChannelCount],
                              filename: str = "channels.xlsx") -> str:
        """Export a channel report with a summary sheet to an Excel workbook"""
        os.makedirs(self.export_dir, exist_ok=True)
        filepath = os.path.join(self.export_dir, filename)
        try:
            df = report.to_frame()
            with pd.ExcelWriter(filepath, engine='openpyxl') as writer:
                df.to_excel(writer, sheet_name='Channels', index=False)

                workbook = writer.book
                worksheet = workbook['Channels']
                self.style_header(worksheet)
                self.adjust_column_widths(worksheet)

                self.create_summary_sheet(workbook, report, counts)

            logger.info(f"Channel report exported to {filepath}")
            return filepath
        except Exception as e:
            logger.error(f"Error exporting channel report to Excel: {e}")
            raise

    def style_header(self, worksheet):
        """Style the header row"""
        header_font = Font(bold=True, color="FFFFFF")
        header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
        header_alignment = Alignment(horizontal="center", vertical="center")

        for cell in worksheet[1]:
            cell.font = header_font
            cell.fill = header_fill
            cell.alignment = header_alignment

    def adjust_column_widths(self, worksheet):
        """Auto-adjust column widths"""
        for column in worksheet.columns:
            column_letter = column[0].column_letter
            max_length = max(len(str(cell.value)) if cell.value is not None else 0 for cell in column)
            worksheet.column_dimensions[column_letter].width = min(max_length + 2, 50)

    def create_summary_sheet(self, workbook, report: ChannelReport, counts: List[ChannelCount]):
        """Channel counts per concurrence threshold"""
        summary_sheet = workbook.create_sheet("Summary")

        concurrences = [record.concurrence for record in report.channels]
        summary_data = [
            ['Channel Report Summary', ''],
            ['', ''],
            ['Channels', len(report.channels)],
            ['Mean Concurrence', sum(concurrences) / len(concurrences) if concurrences else 0.0],
            ['Min Concurrence', min(concurrences) if concurrences else 0.0],
            ['', ''],
            ['Threshold', 'Contiguous / Total'],
        ]
        for count in counts:
            summary_data.append([f'  C > {count.threshold}', f'{count.contiguous} / {count.total}'])

        for row in summary_data:
            summary_sheet.append(row)

        summary_sheet['A1'].font = Font(bold=True, size=14)
        summary_sheet.column_dimensions['A'].width = 28
        summary_sheet.column_dimensions['B'].width = 22
