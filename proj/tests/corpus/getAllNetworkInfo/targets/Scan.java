public class Scan extends Activity {
    void scan() {
        ConnectivityManager cm = (ConnectivityManager) getSystemService(CONNECTIVITY_SERVICE);
        cm.getAllNetworkInfo();
    }
}
