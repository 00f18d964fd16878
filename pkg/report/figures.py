import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)


def plot_loss_curves(frame, output_path, title=None):
    """Training loss against validation loss along theta0(t), one panel per noise level.

    Left column: val_loss vs train_loss; right column: both against t.
    theta0(T) and theta* are marked on every panel.
    """
    levels = sorted(frame["level"].unique())
    fig, axes = plt.subplots(len(levels), 2, figsize=(10, 3.2 * len(levels)), squeeze=False)

    for row, level in enumerate(levels):
        data = frame[frame["level"] == level]
        flow = data[data["kind"] == "flow"]
        ax_phase, ax_time = axes[row]

        ax_phase.plot(flow["train_loss"], flow["val_loss"], color="tab:blue", lw=1.2, label="theta0(t)")
        ax_time.plot(flow["t"], flow["train_loss"], color="tab:blue", lw=1.2, label="training loss")
        ax_time.plot(flow["t"], flow["val_loss"], color="tab:orange", lw=1.2, label="validation loss")

        for kind, marker, color in (("theta0_T", "o", "k"), ("theta_star", "x", "tab:red")):
            point = data[data["kind"] == kind]
            if point.empty:
                continue
            ax_phase.scatter(point["train_loss"], point["val_loss"], marker=marker, color=color,
                             zorder=3, label=kind)
            ax_time.scatter(point["t"], point["val_loss"], marker=marker, color=color, zorder=3)

        ax_phase.set_xscale("log")
        ax_phase.set_yscale("log")
        ax_phase.set_xlabel("training loss")
        ax_phase.set_ylabel("validation loss")
        ax_phase.set_title(f"{level * 100:g}% noise")
        ax_time.set_yscale("log")
        ax_time.set_xlabel("t")
        ax_time.set_ylabel("loss")
        ax_phase.legend(fontsize=8)
        ax_time.legend(fontsize=8)
        ax_phase.grid(True, which="both", alpha=0.3)
        ax_time.grid(True, which="both", alpha=0.3)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(output_path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    logger.debug("loss-curve figure written to %s", output_path)
    return output_path
