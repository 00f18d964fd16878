from reportlab.lib.pagesizes import A4
from reportlab.platypus import SimpleDocTemplate, Paragraph, Spacer, Table, TableStyle, Image
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import inch
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
import os

import pandas as pd

from report.tables import DISCLAIMER, NOISE_LEVELS, table_rows
from utils.helpers import format_number


class ParameterTableReport:
    def __init__(self, output_path="parameter_tables.pdf"):
        self.output_path = output_path
        self.styles = getSampleStyleSheet()
        self.setup_custom_styles()

    def setup_custom_styles(self):
        """Setup custom paragraph styles for the report."""
        self.title_style = ParagraphStyle(
            'CustomTitle',
            parent=self.styles['Heading1'],
            fontSize=20,
            spaceAfter=20,
            alignment=TA_CENTER,
            textColor=colors.darkblue
        )

        self.heading_style = ParagraphStyle(
            'CustomHeading',
            parent=self.styles['Heading2'],
            fontSize=14,
            spaceAfter=10,
            spaceBefore=16,
            textColor=colors.darkblue
        )

        self.normal_style = ParagraphStyle(
            'CustomNormal',
            parent=self.styles['Normal'],
            fontSize=9,
            spaceAfter=6
        )

    def table_style(self):
        return TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.grey),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
            ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, 0), 10),
            ('BOTTOMPADDING', (0, 0), (-1, 0), 10),
            ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
            ('GRID', (0, 0), (-1, -1), 1, colors.black),
            ('FONTSIZE', (0, 1), (-1, -1), 8)
        ])

    def generate_report(self, summary, seeds=None, config_hash=None, figure_path=None):
        """Build the PDF. Output bytes depend only on the inputs (no creation timestamp)."""
        doc = SimpleDocTemplate(self.output_path, pagesize=A4, invariant=1,
                                title="Saturated water parameter tables")
        story = []

        story.extend(self.create_header(seeds, config_hash))
        for level in NOISE_LEVELS:
            if (summary["noise_level"] == level).any():
                story.extend(self.create_level_section(summary, level))
        if "max_rel_prediction_dev" in summary.columns:
            story.extend(self.create_reference_section(summary))
        if figure_path and os.path.exists(figure_path):
            story.append(Paragraph("Loss curves", self.heading_style))
            story.append(Image(figure_path, width=6.5 * inch, height=6.5 * inch, kind='proportional'))

        doc.build(story)
        return self.output_path

    def create_header(self, seeds, config_hash):
        elements = [Paragraph("Estimated Polynomial Parameters", self.title_style)]
        if config_hash:
            elements.append(Paragraph(f"<b>Base config hash:</b> {config_hash}", self.normal_style))
        if seeds:
            seed_text = ", ".join(str(s) for s in seeds)
            elements.append(Paragraph(
                f"<b>Seeds:</b> {seed_text} (split seed s, noise seed s + 1000003)", self.normal_style))
        elements.append(Spacer(1, 0.2 * inch))
        elements.append(Paragraph(DISCLAIMER, self.normal_style))
        return elements

    def create_level_section(self, summary, level):
        """One parameter table for a noise level."""
        elements = [Paragraph(f"{level * 100:g}% random noise distortion", self.heading_style)]
        table = Table(table_rows(summary, level),
                      colWidths=[1.1 * inch, 1.4 * inch, 1.4 * inch, 1.4 * inch, 1.3 * inch])
        table.setStyle(self.table_style())
        elements.append(table)
        return elements

    def create_reference_section(self, summary):
        elements = [Paragraph("Comparison with published estimates", self.heading_style)]
        data = [['Property', 'Noise', 'Residual std', 'Published', 'Max rel. prediction dev.']]
        for _, entry in summary.iterrows():
            if pd.isna(entry.get("reference_residual_std")):
                continue
            data.append([
                entry["model"],
                f"{entry['noise_level'] * 100:g}%",
                format_number(entry["residual_std"]),
                format_number(entry["reference_residual_std"]),
                format_number(entry["max_rel_prediction_dev"]),
            ])
        table = Table(data, colWidths=[1.3 * inch, 0.7 * inch, 1.2 * inch, 1.2 * inch, 2.0 * inch])
        table.setStyle(self.table_style())
        elements.append(table)
        return elements
