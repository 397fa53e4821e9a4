"""Regenerate the bundled placeholder art. Run once; outputs are committed."""

from pathlib import Path

from PIL import Image, ImageDraw

ASSETS = Path(__file__).resolve().parent.parent / "src" / "npcforge" / "resources" / "assets"


def silhouette(draw: ImageDraw.ImageDraw, ox: int, oy: int, size: int, face, shirt) -> None:
    unit = size // 16
    draw.rectangle([ox + 5 * unit, oy + 2 * unit, ox + 11 * unit, oy + 8 * unit], fill=face)
    draw.rectangle([ox + 4 * unit, oy + 8 * unit, ox + 12 * unit, oy + 14 * unit], fill=shirt)
    draw.rectangle([ox + 6 * unit, oy + 5 * unit, ox + 7 * unit, oy + 6 * unit], fill=(40, 40, 60))
    draw.rectangle([ox + 9 * unit, oy + 5 * unit, ox + 10 * unit, oy + 6 * unit], fill=(40, 40, 60))


def portrait(path: Path, base: tuple[int, int, int]) -> None:
    image = Image.new("RGBA", (128, 128), (0, 0, 0, 0))
    draw = ImageDraw.Draw(image)
    face = (235, 205, 180)
    for index, (gx, gy) in enumerate([(0, 0), (64, 0), (0, 64), (64, 64)]):
        shade = tuple(min(255, channel + index * 12) for channel in base)
        draw.rectangle([gx, gy, gx + 63, gy + 63], fill=(*shade, 255))
        silhouette(draw, gx, gy, 64, face, tuple(max(0, channel - 60) for channel in base))
    image.save(path)


def sprite(path: Path, base: tuple[int, int, int]) -> None:
    image = Image.new("RGBA", (64, 128), (0, 0, 0, 0))
    draw = ImageDraw.Draw(image)
    face = (235, 205, 180)
    for row in range(4):
        for column in range(4):
            silhouette(draw, column * 16, row * 32, 16, face, base)
    image.save(path)


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    portrait(ASSETS / "portrait.png", (120, 140, 190))
    sprite(ASSETS / "sprite.png", (90, 110, 170))
    for index, base in enumerate([(190, 120, 120), (120, 170, 120), (150, 120, 180)]):
        portrait(ASSETS / f"card{index}.png", base)
    print("assets written to", ASSETS)


if __name__ == "__main__":
    main()
