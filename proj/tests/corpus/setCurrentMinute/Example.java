public class PickerBinder {
    void bind(TimePicker picker, int minute) {
        if (Build.VERSION.SDK_INT >= Build.VERSION_CODES.M) {
            picker.setMinute(minute);
        } else {
            picker.setCurrentMinute(minute);
        }
    }
}
