public class Shader {
    void draw(Canvas c, RectF rect) {
        c.saveLayer(rect, null, Canvas.ALL_SAVE_FLAG);
        c.restoreToCount(1);
    }
}
